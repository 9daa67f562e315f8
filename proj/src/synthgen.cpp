#include "guardscan/synthgen.hpp"

#include "guardscan/image_io.hpp"
#include "guardscan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace guardscan {
namespace {

constexpr double kTruncation = 4.0;  // spacing draws are redrawn beyond this many sigmas

double shear(const SynthConfig& cfg) { return std::tan(cfg.tilt_deg * std::numbers::pi / 180.0); }

long max_spacing_px(const SynthConfig& cfg)
{
    double s = 0.0;
    for (const GmmComponent& c : cfg.spacing_model.components)
        s = std::max(s, c.mean + kTruncation * std::sqrt(c.variance));
    return std::lround(s * cfg.base_spacing);
}

long min_spacing_px(const SynthConfig& cfg)
{
    double s = std::numeric_limits<double>::infinity();
    for (const GmmComponent& c : cfg.spacing_model.components)
        s = std::min(s, c.mean - kTruncation * std::sqrt(c.variance));
    return std::lround(s * cfg.base_spacing);
}

double draw_spacing(const GmmModel& m, Rng& rng)
{
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t comp = m.components.size() - 1;
    for (std::size_t i = 0; i < m.components.size(); ++i) {
        acc += m.components[i].weight;
        if (u < acc) {
            comp = i;
            break;
        }
    }
    const GmmComponent& c = m.components[comp];
    const double sd = std::sqrt(c.variance);
    for (;;) {
        const double s = rng.normal(c.mean, sd);
        if (std::abs(s - c.mean) <= kTruncation * sd) return s;
    }
}

void fill_rect(Image& img, int x0, int y0, int x1, int y1, double v)
{
    for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y)
        for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x) img.at(x, y) = v;
}

bool overlaps_any(const BoundingBox& b, const std::vector<BoundingBox>& others, int pad)
{
    const BoundingBox grown{b.x - pad, b.y - pad, b.w + 2 * pad, b.h + 2 * pad};
    return std::any_of(others.begin(), others.end(),
                       [&](const BoundingBox& o) { return intersection_area(grown, o) > 0; });
}

}  // namespace

void SynthConfig::validate() const
{
    if (image_w <= 0 || image_h <= 0) throw std::invalid_argument("synth: image size must be positive");
    if (post_w <= 0 || post_h <= 0 || bar_w <= 0 || bar_w > post_w || bar_top_margin < 0 || bar_top_margin >= post_h)
        throw std::invalid_argument("synth: invalid post geometry");
    if (slab_thickness <= 0) throw std::invalid_argument("synth: slab thickness must be positive");
    if (posts_per_floor < 0 || wall_clutter < 0 || floor_clutter < 0)
        throw std::invalid_argument("synth: counts must be non-negative");
    if (!(missing_prob >= 0.0 && missing_prob < 1.0)) throw std::invalid_argument("synth: missing_prob must lie in [0, 1)");
    if (!(base_spacing > 0.0) || !(noise_sigma >= 0.0)) throw std::invalid_argument("synth: invalid spacing or noise");
    spacing_model.validate();
    const double drift = std::abs(shear(*this)) * image_w;
    for (int fy : floor_ys) {
        if (fy - post_h < 0 || fy + slab_thickness + drift > image_h || fy - drift - post_h < 0)
            throw std::invalid_argument("synth: floor at y=" + std::to_string(fy) + " does not fit in the image");
    }
    if (posts_per_floor > 1) {
        if (min_spacing_px(*this) < 1)
            throw std::invalid_argument("synth: spacing model allows non-positive post spacing");
        const long need = 2L * margin + post_w + static_cast<long>(posts_per_floor - 1) * max_spacing_px(*this);
        if (need > image_w)
            throw std::invalid_argument("synth: " + std::to_string(posts_per_floor) + " posts need " +
                                        std::to_string(need) + " px per floor but the image is " +
                                        std::to_string(image_w) + " px wide");
    } else if (posts_per_floor == 1 && 2 * margin + post_w > image_w) {
        throw std::invalid_argument("synth: a post does not fit inside the margins");
    }
}

SynthScene render_facade(const SynthConfig& cfg)
{
    cfg.validate();
    Rng rng(cfg.seed);
    const double t = shear(cfg);
    SynthScene scene;
    Image img(cfg.image_w, cfg.image_h, 1, cfg.background);

    std::vector<int> floors = cfg.floor_ys;
    std::sort(floors.begin(), floors.end());
    for (int fy : floors) {
        for (int x = 0; x < cfg.image_w; ++x) {
            const int top = static_cast<int>(std::lround(fy + t * x));
            fill_rect(img, x, top, x + 1, top + cfg.slab_thickness, cfg.floor_intensity);
        }
        scene.true_floor_lines.push_back(FloorLine{t, static_cast<double>(fy), static_cast<double>(cfg.image_w), 1});
    }

    auto post_box = [&](int center, int floor_y) {
        const int bottom = static_cast<int>(std::lround(floor_y + t * center));
        return BoundingBox{center - cfg.post_w / 2, bottom - cfg.post_h, cfg.post_w, cfg.post_h};
    };
    auto draw_bar = [&](const BoundingBox& b) {
        const int cx = b.x + cfg.post_w / 2;
        const int x0 = cx - cfg.bar_w / 2;
        fill_rect(img, x0, b.y + cfg.bar_top_margin, x0 + cfg.bar_w, b.bottom(), cfg.post_intensity);
    };

    // Posts per floor; `present` keeps (floor, slot) so floor clutter can find true neighbours.
    struct Slot {
        int floor_index;
        int center;
        bool present;
    };
    std::vector<std::vector<Slot>> slots(floors.size());
    std::vector<BoundingBox> occupied;
    for (std::size_t f = 0; f < floors.size(); ++f) {
        const int n = cfg.posts_per_floor;
        if (n == 0) continue;
        std::vector<long> gaps;
        long span = 0;
        for (int i = 0; i + 1 < n; ++i) {
            gaps.push_back(std::lround(draw_spacing(cfg.spacing_model, rng) * cfg.base_spacing));
            span += gaps.back();
        }
        const long slack = cfg.image_w - 2L * cfg.margin - cfg.post_w - span;
        long center = cfg.margin + cfg.post_w / 2 + rng.between(0, std::max(0L, slack));
        for (int i = 0; i < n; ++i) {
            if (i > 0) center += gaps[static_cast<std::size_t>(i - 1)];
            const BoundingBox box = post_box(static_cast<int>(center), floors[f]);
            const bool missing = rng.bernoulli(cfg.missing_prob);
            slots[f].push_back({static_cast<int>(f), static_cast<int>(center), !missing});
            occupied.push_back(box);
            if (missing) {
                scene.removed_posts.push_back(box);
            } else {
                scene.post_annotations.push_back(box);
                scene.annotation_floor.push_back(static_cast<int>(f));
                draw_bar(box);
            }
        }
        if (cfg.rail) {
            const BoundingBox first = post_box(slots[f].front().center, floors[f]);
            const BoundingBox last = post_box(slots[f].back().center, floors[f]);
            fill_rect(img, first.x + cfg.post_w / 2, first.y + cfg.bar_top_margin, last.x + cfg.post_w / 2 + 1,
                      first.y + cfg.bar_top_margin + 2, cfg.post_intensity);
        }
    }

    // Wall clutter: post-like bars floating clear of every floor line.
    const int drift = static_cast<int>(std::ceil(std::abs(t) * cfg.image_w));
    const int clearance = 20;
    std::vector<std::pair<int, int>> bands;  // admissible box-top ranges
    for (std::size_t f = 0; f + 1 < floors.size(); ++f) {
        const int lo = floors[f] + cfg.slab_thickness + 1 + drift;
        const int hi = floors[f + 1] - clearance - cfg.post_h - drift;
        if (hi >= lo) bands.emplace_back(lo, hi);
    }
    for (int c = 0; c < cfg.wall_clutter && !bands.empty(); ++c) {
        for (int attempt = 0; attempt < 50; ++attempt) {
            const auto& band = bands[rng.below(bands.size())];
            const BoundingBox b{static_cast<int>(rng.between(0, cfg.image_w - cfg.post_w)),
                                static_cast<int>(rng.between(band.first, band.second)), cfg.post_w, cfg.post_h};
            if (overlaps_any(b, occupied, 2)) continue;
            occupied.push_back(b);
            scene.distractors.push_back(b);
            draw_bar(b);
            break;
        }
    }

    // Floor clutter: at most one bar per floor, standing between two neighbouring present posts.
    const int min_offset = cfg.post_w - 4;
    std::vector<std::size_t> floor_order(floors.size());
    for (std::size_t f = 0; f < floor_order.size(); ++f) floor_order[f] = f;
    rng.shuffle(std::span<std::size_t>(floor_order));
    int placed = 0;
    for (std::size_t f : floor_order) {
        if (placed == cfg.floor_clutter) break;
        const auto& row = slots[f];
        std::vector<std::size_t> gaps;
        for (std::size_t i = 0; i + 1 < row.size(); ++i)
            if (row[i].present && row[i + 1].present && row[i + 1].center - row[i].center >= 2 * min_offset + 1)
                gaps.push_back(i);
        if (gaps.empty()) continue;
        const std::size_t i = gaps[rng.below(gaps.size())];
        const int center = static_cast<int>(rng.between(row[i].center + min_offset, row[i + 1].center - min_offset));
        const BoundingBox b = post_box(center, floors[f]);
        scene.distractors.push_back(b);
        draw_bar(b);
        ++placed;
    }

    if (cfg.noise_sigma > 0.0)
        for (double& v : img.data) v = std::clamp(v + rng.normal(0.0, cfg.noise_sigma), 0.0, 1.0);
    quantize_8bit(img);
    scene.image = std::move(img);
    return scene;
}

}  // namespace guardscan
