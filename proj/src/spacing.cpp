#include "guardscan/spacing.hpp"

#include "guardscan/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace guardscan {
namespace {

double median_of(std::vector<double> v)
{
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double log_normal_pdf(double x, double mean, double variance)
{
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_sum_exp(const std::vector<double>& v)
{
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

double GmmModel::density(double x) const
{
    double p = 0.0;
    for (const GmmComponent& c : components) p += c.weight * std::exp(log_normal_pdf(x, c.mean, c.variance));
    return p;
}

double GmmModel::log_likelihood(const std::vector<double>& xs) const
{
    std::vector<double> terms(components.size());
    double total = 0.0;
    for (double x : xs) {
        for (std::size_t c = 0; c < components.size(); ++c)
            terms[c] = std::log(components[c].weight) + log_normal_pdf(x, components[c].mean, components[c].variance);
        total += log_sum_exp(terms);
    }
    return total;
}

void GmmModel::validate() const
{
    if (components.empty()) throw std::invalid_argument("gmm: no components");
    double sum = 0.0;
    for (const GmmComponent& c : components) {
        if (!(c.weight >= 0.0) || !(c.variance > 0.0) || !std::isfinite(c.mean))
            throw std::invalid_argument("gmm: invalid component");
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("gmm: weights do not sum to one");
}

std::vector<double> normalized_spacings(const std::map<int, std::vector<BoundingBox>>& boxes_by_floor)
{
    std::vector<double> out;
    for (const auto& [floor, boxes] : boxes_by_floor) {
        if (boxes.size() < 2) continue;
        std::vector<double> xs;
        for (const BoundingBox& b : boxes) xs.push_back(b.center_x());
        std::sort(xs.begin(), xs.end());
        std::vector<double> gaps;
        for (std::size_t i = 1; i < xs.size(); ++i) gaps.push_back(xs[i] - xs[i - 1]);
        const double med = median_of(gaps);
        if (!(med > 0.0)) continue;
        for (double g : gaps)
            if (g > 0.0) out.push_back(g / med);
    }
    return out;
}

GmmModel fit_gmm_em(const std::vector<double>& xs, int k, const EmConfig& cfg, EmTrace* trace)
{
    if (k < 1) throw std::invalid_argument("fit_gmm_em: k must be at least 1");
    const std::size_t n = xs.size();
    if (n < static_cast<std::size_t>(k))
        throw std::invalid_argument("fit_gmm_em: " + std::to_string(n) + " samples are too few for " +
                                    std::to_string(k) + " components");
    for (double x : xs)
        if (!std::isfinite(x)) throw std::invalid_argument("fit_gmm_em: non-finite sample");
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (k > 1 && *lo == *hi) throw std::invalid_argument("fit_gmm_em: degenerate sample set");

    // k-means++ seeding.
    Rng rng(cfg.seed);
    std::vector<double> centers{xs[rng.below(n)]};
    std::vector<double> d2(n);
    while (centers.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) best = std::min(best, (xs[i] - c) * (xs[i] - c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        centers.push_back(xs[pick]);
    }

    double mean_all = 0.0;
    for (double x : xs) mean_all += x;
    mean_all /= static_cast<double>(n);
    double var_all = 0.0;
    for (double x : xs) var_all += (x - mean_all) * (x - mean_all);
    var_all = std::max(var_all / static_cast<double>(n), cfg.variance_floor);

    GmmModel model;
    model.components.resize(static_cast<std::size_t>(k));
    {
        std::vector<double> cnt(k, 0.0), sum(k, 0.0), sq(k, 0.0);
        for (double x : xs) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < centers.size(); ++c)
                if (std::abs(x - centers[c]) < std::abs(x - centers[best])) best = c;
            cnt[best] += 1.0;
            sum[best] += x;
            sq[best] += x * x;
        }
        for (int c = 0; c < k; ++c) {
            GmmComponent& comp = model.components[c];
            if (cnt[c] > 0.0) {
                comp.weight = cnt[c] / static_cast<double>(n);
                comp.mean = sum[c] / cnt[c];
                comp.variance = std::max(sq[c] / cnt[c] - comp.mean * comp.mean, cfg.variance_floor);
                if (cnt[c] < 2.0) comp.variance = var_all;
            } else {
                comp.weight = 0.0;
                comp.mean = centers[c];
                comp.variance = var_all;
            }
        }
        // Empty clusters still need mass for the E-step to see them.
        double wsum = 0.0;
        for (auto& comp : model.components) {
            comp.weight = std::max(comp.weight, 1.0 / static_cast<double>(n));
            wsum += comp.weight;
        }
        for (auto& comp : model.components) comp.weight /= wsum;
    }

    double ll = model.log_likelihood(xs);
    if (trace != nullptr) trace->log_likelihood.push_back(ll);
    std::vector<double> resp(n * static_cast<std::size_t>(k));
    std::vector<double> terms(static_cast<std::size_t>(k));
    int iter = 0;
    for (; iter < cfg.max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) {
                const GmmComponent& comp = model.components[c];
                terms[c] = std::log(comp.weight) + log_normal_pdf(xs[i], comp.mean, comp.variance);
            }
            const double norm = log_sum_exp(terms);
            for (int c = 0; c < k; ++c) resp[i * k + c] = std::exp(terms[c] - norm);
        }
        GmmModel next = model;
        for (int c = 0; c < k; ++c) {
            double nk = 0.0, sx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i * k + c];
                sx += resp[i * k + c] * xs[i];
            }
            if (!(nk > 0.0)) continue;  // component starved; keep its parameters
            const double mean = sx / nk;
            double sv = 0.0;
            for (std::size_t i = 0; i < n; ++i) sv += resp[i * k + c] * (xs[i] - mean) * (xs[i] - mean);
            next.components[c] = {nk / static_cast<double>(n), mean, std::max(sv / nk, cfg.variance_floor)};
        }
        double wsum = 0.0;
        for (const auto& comp : next.components) wsum += comp.weight;
        for (auto& comp : next.components) comp.weight /= wsum;
        const double next_ll = next.log_likelihood(xs);
        model = std::move(next);
        if (trace != nullptr) {
            trace->log_likelihood.push_back(next_ll);
            double ws = 0.0;
            for (const auto& comp : model.components) ws += comp.weight;
            trace->weight_sums.push_back(ws);
        }
        const double gain = next_ll - ll;
        ll = next_ll;
        if (gain < cfg.tol) {
            ++iter;
            break;
        }
    }
    if (trace != nullptr) trace->iterations = iter;
    return model;
}

BicChoice select_k_bic(const std::vector<double>& samples, int k_min, int k_max, const EmConfig& cfg)
{
    if (k_min < 1 || k_max < k_min) throw std::invalid_argument("select_k_bic: invalid k range");
    BicChoice choice;
    double best = std::numeric_limits<double>::infinity();
    const double log_n = std::log(static_cast<double>(samples.size()));
    for (int k = k_min; k <= k_max; ++k) {
        GmmModel m = fit_gmm_em(samples, k, cfg);
        const double bic = -2.0 * m.log_likelihood(samples) + (3.0 * k - 1.0) * log_n;
        choice.bic.push_back(bic);
        if (bic < best) {
            best = bic;
            choice.k = k;
            choice.model = std::move(m);
        }
    }
    return choice;
}

std::string spacing_histogram_csv(const std::vector<double>& samples, const GmmModel& model, int bins,
                                  double s_max)
{
    if (bins < 1 || !(s_max > 0.0)) throw std::invalid_argument("spacing histogram needs bins >= 1 and s_max > 0");
    const double width = s_max / bins;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double s : samples) {
        if (s < 0.0 || s > s_max) continue;
        counts[std::min(static_cast<std::size_t>(s / width), counts.size() - 1)]++;
    }
    std::string out = "bin_center,sample_density";
    for (int c = 0; c < model.k(); ++c) out += fmt::format(",component_{}", c);
    out += ",mixture\n";
    const double n = samples.empty() ? 1.0 : static_cast<double>(samples.size());
    for (int b = 0; b < bins; ++b) {
        const double x = (b + 0.5) * width;
        out += fmt::format("{:.6g},{:.6g}", x, static_cast<double>(counts[static_cast<std::size_t>(b)]) / (n * width));
        for (const GmmComponent& c : model.components)
            out += fmt::format(",{:.6g}", c.weight * std::exp(log_normal_pdf(x, c.mean, c.variance)));
        out += fmt::format(",{:.6g}\n", model.density(x));
    }
    return out;
}

UbiquityTable build_ubiquity_table(const GmmModel& model, const UbiquityConfig& cfg)
{
    if (cfg.bins < 1 || !(cfg.s_max > 0.0)) throw std::invalid_argument("ubiquity: bins and s_max must be positive");
    if (cfg.tau && !(*cfg.tau >= 0.0)) throw std::invalid_argument("ubiquity: tau must be non-negative");
    model.validate();
    UbiquityTable t;
    const double width = cfg.s_max / cfg.bins;
    for (int i = 0; i <= cfg.bins; ++i) t.bin_edges.push_back(i * width);
    std::vector<double> dens;
    for (int i = 0; i < cfg.bins; ++i) dens.push_back(model.density((i + 0.5) * width));
    const double peak = *std::max_element(dens.begin(), dens.end());
    t.tau = cfg.tau ? *cfg.tau : cfg.tau_peak_fraction * peak;
    for (double d : dens) t.values.push_back(d - t.tau);
    return t;
}

double UbiquityTable::lookup(double s) const
{
    const std::size_t bins = values.size();
    const double s_max = bin_edges.back();
    if (!(s > 0.0)) return values.front();
    if (s >= s_max) return values.back();
    const auto idx = static_cast<std::size_t>(s / (s_max / static_cast<double>(bins)));
    return values[std::min(idx, bins - 1)];
}

std::vector<Detection> sort_by_center_x(std::vector<Detection> dets)
{
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.box.center_x() != b.box.center_x()) return a.box.center_x() < b.box.center_x();
        return a.box.y < b.box.y;
    });
    return dets;
}

ChainResult select_best_combination_detailed(const std::vector<Detection>& dets_on_floor, const UbiquityTable& table)
{
    ChainResult result;
    const std::size_t n = dets_on_floor.size();
    if (n < 2) {
        result.kept = dets_on_floor;
        for (std::size_t i = 0; i < n; ++i) result.kept_indices.push_back(static_cast<int>(i));
        return result;
    }
    const std::vector<Detection> sorted = sort_by_center_x(dets_on_floor);
    std::vector<double> gaps;
    for (std::size_t i = 1; i < n; ++i) gaps.push_back(sorted[i].box.center_x() - sorted[i - 1].box.center_x());
    const double med = median_of(gaps);

    auto single_best = [&] {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (sorted[i].score > sorted[best].score) best = i;
        result.kept = {sorted[best]};
        result.kept_indices = {static_cast<int>(best)};
    };
    if (!(med > 0.0)) {
        result.objective = 0.0;
        single_best();
        return result;
    }

    // open[j]: best chain ending at j, where a lone j scores 0.
    // closed[j]: best chain of at least two detections ending at j.
    std::vector<double> open(n, 0.0), closed(n, -std::numeric_limits<double>::infinity());
    std::vector<int> open_prev(n, -1), closed_prev(n, -1);
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const double v = table.lookup((sorted[j].box.center_x() - sorted[i].box.center_x()) / med);
            const double cand = open[i] + v;
            if (cand > closed[j]) {
                closed[j] = cand;
                closed_prev[j] = static_cast<int>(i);
            }
        }
        if (closed[j] > 0.0) {
            open[j] = closed[j];
            open_prev[j] = closed_prev[j];
        }
    }
    std::size_t end = 1;
    for (std::size_t j = 2; j < n; ++j)
        if (closed[j] > closed[end]) end = j;
    result.objective = closed[end];
    if (!(result.objective > 0.0)) {
        single_best();
        return result;
    }
    std::vector<int> chain{static_cast<int>(end)};
    for (int i = closed_prev[end]; i >= 0; i = open_prev[i]) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());
    for (int i : chain) result.kept.push_back(sorted[static_cast<std::size_t>(i)]);
    result.kept_indices = std::move(chain);
    return result;
}

std::vector<Detection> select_best_combination(const std::vector<Detection>& dets_on_floor, const UbiquityTable& table)
{
    return select_best_combination_detailed(dets_on_floor, table).kept;
}

std::vector<Detection> apply_spacing(const std::vector<Detection>& dets, const std::vector<FloorLine>& floors,
                                     const UbiquityTable& table)
{
    std::vector<Detection> out;
    if (floors.empty()) {
        out = dets;
    } else {
        std::map<int, std::vector<Detection>> by_floor;
        for (const Detection& d : dets) by_floor[nearest_floor(d.box, floors)].push_back(d);
        for (const auto& [floor, group] : by_floor) {
            const auto kept = select_best_combination(group, table);
            out.insert(out.end(), kept.begin(), kept.end());
        }
    }
    std::stable_sort(out.begin(), out.end(), detection_order);
    return out;
}

}  // namespace guardscan
