#include "guardscan/floors.hpp"

#include "guardscan/log.hpp"
#include "guardscan/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <tuple>
#include <stdexcept>
#include <string>

namespace guardscan {

double LineSegment::length() const { return std::hypot(x2 - x1, y2 - y1); }

double LineSegment::slope() const
{
    const double dx = x2 - x1;
    const double dy = y2 - y1;
    if (dx == 0.0) return dy >= 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    return dy / dx;
}

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

// Distance between two undirected angles in degrees.
double angle_diff(double a, double b)
{
    double d = std::fmod(std::abs(a - b), 180.0);
    return std::min(d, 180.0 - d);
}

double line_angle(const LineSegment& s) { return std::atan2(s.y2 - s.y1, s.x2 - s.x1) * kDeg; }

}  // namespace

std::vector<LineSegment> detect_line_segments(const Image& img, const SegmentConfig& cfg)
{
    const Image gray = to_grayscale(img);
    if (gray.width < 3 || gray.height < 3) return {};
    const GradientField g = gradient(gray);
    const int w = g.width;
    const int h = g.height;

    std::vector<std::uint32_t> seeds;
    for (std::size_t i = 0; i < g.magnitude.size(); ++i)
        if (g.magnitude[i] > cfg.grad_threshold) seeds.push_back(static_cast<std::uint32_t>(i));
    std::stable_sort(seeds.begin(), seeds.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return g.magnitude[a] > g.magnitude[b]; });

    std::vector<char> used(g.magnitude.size(), 0);
    std::vector<LineSegment> out;
    std::vector<std::uint32_t> region;
    std::deque<std::uint32_t> queue;
    for (std::uint32_t seed : seeds) {
        if (used[seed]) continue;
        used[seed] = 1;
        region.assign(1, seed);
        queue.assign(1, seed);
        // Region orientation as the mean of doubled angles, so 0 and 180 agree.
        double sum_c = std::cos(2.0 * g.orientation[seed] / kDeg);
        double sum_s = std::sin(2.0 * g.orientation[seed] / kDeg);
        double region_angle = g.orientation[seed];
        while (!queue.empty()) {
            const std::uint32_t p = queue.front();
            queue.pop_front();
            const int px = static_cast<int>(p % w);
            const int py = static_cast<int>(p / w);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = px + dx;
                    const int ny = py + dy;
                    if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const std::uint32_t n = static_cast<std::uint32_t>(ny) * w + nx;
                    if (used[n] || g.magnitude[n] <= cfg.grad_threshold) continue;
                    if (angle_diff(g.orientation[n], region_angle) > cfg.angle_tolerance_deg) continue;
                    used[n] = 1;
                    region.push_back(n);
                    queue.push_back(n);
                    sum_c += std::cos(2.0 * g.orientation[n] / kDeg);
                    sum_s += std::sin(2.0 * g.orientation[n] / kDeg);
                    region_angle = 0.5 * std::atan2(sum_s, sum_c) * kDeg;
                    if (region_angle < 0.0) region_angle += 180.0;
                }
            }
        }
        if (region.size() < 2) continue;

        double wsum = 0.0, cx = 0.0, cy = 0.0;
        for (std::uint32_t p : region) {
            const double m = g.magnitude[p];
            wsum += m;
            cx += m * static_cast<double>(p % w);
            cy += m * static_cast<double>(p / w);
        }
        cx /= wsum;
        cy /= wsum;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (std::uint32_t p : region) {
            const double m = g.magnitude[p];
            const double ex = static_cast<double>(p % w) - cx;
            const double ey = static_cast<double>(p / w) - cy;
            sxx += m * ex * ex;
            syy += m * ey * ey;
            sxy += m * ex * ey;
        }
        const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
        const double ux = std::cos(phi);
        const double uy = std::sin(phi);
        double tmin = std::numeric_limits<double>::infinity();
        double tmax = -tmin;
        for (std::uint32_t p : region) {
            const double t = (static_cast<double>(p % w) - cx) * ux + (static_cast<double>(p / w) - cy) * uy;
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        // Pixel extremes can project past the border; keep the endpoints inside the image.
        for (const auto& [c, u, hi] : {std::tuple{cx, ux, w - 1.0}, std::tuple{cy, uy, h - 1.0}}) {
            if (std::abs(u) < 1e-12) continue;
            const double a = (0.0 - c) / u, b = (hi - c) / u;
            tmin = std::max(tmin, std::min(a, b));
            tmax = std::min(tmax, std::max(a, b));
        }
        if (tmax - tmin < cfg.min_length) continue;
        LineSegment s{cx + tmin * ux, cy + tmin * uy, cx + tmax * ux, cy + tmax * uy, wsum};
        if (s.x1 > s.x2 || (s.x1 == s.x2 && s.y1 > s.y2)) {
            std::swap(s.x1, s.x2);
            std::swap(s.y1, s.y2);
        }
        out.push_back(s);
    }
    return out;
}

namespace {

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 homogeneous_line(const LineSegment& s)
{
    Vec3 l = cross({s.x1, s.y1, 1.0}, {s.x2, s.y2, 1.0});
    const double n = std::hypot(l[0], l[1]);
    if (n > 0.0)
        for (double& v : l) v /= n;
    return l;
}

VanishingPoint direction_at_infinity(const LineSegment& s)
{
    const double a = line_angle(s) / kDeg;
    return {std::cos(a), std::sin(a), 0.0};
}

VanishingPoint hypothesis(const LineSegment& a, const Vec3& la, const Vec3& lb)
{
    const Vec3 v = cross(la, lb);
    const double planar = std::hypot(v[0], v[1]);
    if (planar == 0.0 && v[2] == 0.0) return direction_at_infinity(a);  // identical lines
    if (std::abs(v[2]) <= 1e-9 * planar) return {v[0], v[1], 0.0};
    return {v[0] / v[2], v[1] / v[2], 1.0};
}

bool is_inlier(const LineSegment& s, const VanishingPoint& vp, double tol_deg)
{
    double tx, ty;
    if (vp.w == 0.0) {
        tx = vp.x;
        ty = vp.y;
    } else {
        tx = vp.x - s.mid_x();
        ty = vp.y - s.mid_y();
        if (tx == 0.0 && ty == 0.0) return true;
    }
    return angle_diff(line_angle(s), std::atan2(ty, tx) * kDeg) <= tol_deg;
}

}  // namespace

std::vector<SegmentGroup> group_by_vanishing_point(const std::vector<LineSegment>& segs, const VanishingConfig& cfg)
{
    std::vector<Vec3> lines;
    lines.reserve(segs.size());
    for (const LineSegment& s : segs) lines.push_back(homogeneous_line(s));

    std::vector<int> remaining(segs.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    Rng rng(cfg.seed);
    std::vector<SegmentGroup> groups;
    while (!remaining.empty()) {
        if (remaining.size() == 1) {
            groups.push_back({direction_at_infinity(segs[remaining[0]]), {remaining[0]}});
            break;
        }
        const std::size_t n = remaining.size();
        std::size_t best_count = 0;
        VanishingPoint best_vp;
        auto consider = [&](int i, int j) {
            const VanishingPoint vp = hypothesis(segs[i], lines[i], lines[j]);
            std::size_t count = 0;
            for (int r : remaining)
                if (is_inlier(segs[r], vp, cfg.inlier_angle_deg)) ++count;
            if (count > best_count) {
                best_count = count;
                best_vp = vp;
            }
        };
        if (n * (n - 1) / 2 <= static_cast<std::size_t>(std::max(cfg.ransac_iters, 1))) {
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b) consider(remaining[a], remaining[b]);
        } else {
            for (int it = 0; it < cfg.ransac_iters; ++it) {
                const std::size_t a = rng.below(n);
                std::size_t b = rng.below(n - 1);
                if (b >= a) ++b;
                consider(remaining[a], remaining[b]);
            }
        }
        SegmentGroup group{best_vp, {}};
        std::vector<int> rest;
        for (int r : remaining) (is_inlier(segs[r], best_vp, cfg.inlier_angle_deg) ? group.members : rest).push_back(r);
        if (group.members.empty()) {  // cannot happen for a pair hypothesis; guards against NaN input
            group = {direction_at_infinity(segs[remaining[0]]), {remaining[0]}};
            rest.assign(remaining.begin() + 1, remaining.end());
        }
        groups.push_back(std::move(group));
        remaining = std::move(rest);
    }
    std::stable_sort(groups.begin(), groups.end(),
                     [](const SegmentGroup& a, const SegmentGroup& b) { return a.members.size() > b.members.size(); });
    return groups;
}

namespace {

double weighted_median_slope(const std::vector<LineSegment>& group)
{
    std::vector<std::pair<double, double>> sw;
    double total = 0.0;
    for (const LineSegment& s : group) {
        sw.emplace_back(s.slope(), s.strength);
        total += s.strength;
    }
    std::sort(sw.begin(), sw.end());
    double acc = 0.0;
    for (const auto& [slope, weight] : sw) {
        acc += weight;
        if (acc >= 0.5 * total) return slope;
    }
    return sw.back().first;
}

double union_length(std::vector<std::pair<double, double>> intervals)
{
    std::sort(intervals.begin(), intervals.end());
    double total = 0.0;
    double lo = intervals.front().first, hi = intervals.front().second;
    for (std::size_t i = 1; i < intervals.size(); ++i) {
        if (intervals[i].first > hi) {
            total += hi - lo;
            lo = intervals[i].first;
            hi = intervals[i].second;
        } else {
            hi = std::max(hi, intervals[i].second);
        }
    }
    return total + (hi - lo);
}

}  // namespace

std::vector<FloorLine> cluster_segments(const std::vector<LineSegment>& group, double intercept_tolerance,
                                        double slope_tolerance)
{
    if (group.empty()) return {};
    for (std::size_t i = 0; i < group.size(); ++i) {
        const LineSegment& s = group[i];
        if (!(std::abs(s.slope()) <= slope_tolerance))
            throw std::invalid_argument("cluster_segments: segment " + std::to_string(i) + " (" +
                                        std::to_string(s.x1) + "," + std::to_string(s.y1) + ")-(" +
                                        std::to_string(s.x2) + "," + std::to_string(s.y2) +
                                        ") is not near-horizontal");
    }
    const double ref_slope = weighted_median_slope(group);
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < group.size(); ++i)
        keyed.emplace_back(group[i].mid_y() - ref_slope * group[i].mid_x(), i);
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<FloorLine> out;
    std::size_t start = 0;
    for (std::size_t k = 1; k <= keyed.size(); ++k) {
        if (k < keyed.size() && keyed[k].first - keyed[k - 1].first <= intercept_tolerance) continue;
        // Strength-weighted least squares through the endpoints of the members.
        double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        std::vector<std::pair<double, double>> spans;
        for (std::size_t m = start; m < k; ++m) {
            const LineSegment& s = group[keyed[m].second];
            const double wt = 0.5 * s.strength;
            for (const auto& [x, y] : {std::pair{s.x1, s.y1}, std::pair{s.x2, s.y2}}) {
                sw += wt;
                sx += wt * x;
                sy += wt * y;
                sxx += wt * x * x;
                sxy += wt * x * y;
            }
            spans.emplace_back(std::min(s.x1, s.x2), std::max(s.x1, s.x2));
        }
        const double mx = sx / sw;
        const double my = sy / sw;
        const double var_x = sxx / sw - mx * mx;
        double slope = ref_slope;
        if (var_x > 1e-9) {
            const double fitted = (sxy / sw - mx * my) / var_x;
            if (std::abs(fitted) <= slope_tolerance) slope = fitted;
        }
        FloorLine line;
        line.slope = slope;
        line.intercept = my - slope * mx;
        line.coverage = union_length(std::move(spans));
        line.support = static_cast<int>(k - start);
        out.push_back(line);
        start = k;
    }
    return out;
}

std::vector<FloorLine> select_floors(std::vector<FloorLine> lines, int k)
{
    if (k < 1) throw std::invalid_argument("select_floors: k must be at least 1");
    std::stable_sort(lines.begin(), lines.end(), [](const FloorLine& a, const FloorLine& b) {
        if (a.coverage != b.coverage) return a.coverage > b.coverage;
        if (a.support != b.support) return a.support > b.support;
        return a.intercept < b.intercept;
    });
    if (lines.size() > static_cast<std::size_t>(k)) lines.resize(static_cast<std::size_t>(k));
    return lines;
}

std::vector<FloorLine> detect_floors(const Image& img, const FloorConfig& cfg)
{
    const std::vector<LineSegment> segs = detect_line_segments(img, cfg.segments);
    if (segs.empty()) return {};
    const std::vector<SegmentGroup> groups = group_by_vanishing_point(segs, cfg.vanishing);
    for (const SegmentGroup& grp : groups) {
        std::vector<double> slopes;
        for (int m : grp.members) slopes.push_back(std::abs(segs[m].slope()));
        std::nth_element(slopes.begin(), slopes.begin() + static_cast<std::ptrdiff_t>(slopes.size() / 2), slopes.end());
        if (!(slopes[slopes.size() / 2] <= cfg.slope_tolerance)) continue;
        std::vector<LineSegment> horizontal;
        for (int m : grp.members)
            if (std::abs(segs[m].slope()) <= cfg.slope_tolerance) horizontal.push_back(segs[m]);
        return select_floors(cluster_segments(horizontal, cfg.intercept_tolerance, cfg.slope_tolerance), cfg.k);
    }
    return {};
}

double floor_distance(const BoundingBox& box, const FloorLine& line)
{
    return std::abs(static_cast<double>(box.bottom()) - line.y_at(box.center_x()));
}

int nearest_floor(const BoundingBox& box, const std::vector<FloorLine>& floors)
{
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < floors.size(); ++i) {
        const double d = floor_distance(box, floors[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

std::vector<Detection> filter_by_floor(const std::vector<Detection>& dets, const std::vector<FloorLine>& floors,
                                       double max_dist)
{
    if (!(max_dist >= 0.0)) throw std::invalid_argument("filter_by_floor: max_dist must be non-negative");
    if (floors.empty()) {
        log::warn("filter_by_floor: no floors detected, keeping all {} detections", dets.size());
        return dets;
    }
    std::vector<Detection> out;
    for (const Detection& d : dets) {
        const int f = nearest_floor(d.box, floors);
        if (floor_distance(d.box, floors[static_cast<std::size_t>(f)]) <= max_dist) out.push_back(d);
    }
    return out;
}

}  // namespace guardscan
