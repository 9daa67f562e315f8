#include "guardscan/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace guardscan {

void validate_cascade(const CascadeModel& model)
{
    if (model.stages.empty()) throw std::invalid_argument("cascade: model has no stages");
    for (std::size_t s = 0; s < model.stages.size(); ++s) {
        const CascadeStage& st = model.stages[s];
        const std::string where = "cascade stage " + std::to_string(s) + ": ";
        if (st.weak_learners.empty()) throw std::invalid_argument(where + "no weak learners");
        const std::size_t dim = hog_length(model.window_w, model.window_h, st.hog);
        for (const Stump& stump : st.weak_learners) {
            if (stump.feature < 0 || static_cast<std::size_t>(stump.feature) >= dim)
                throw std::invalid_argument(where + "stump feature index out of range");
            if (stump.polarity != 1 && stump.polarity != -1)
                throw std::invalid_argument(where + "stump polarity must be +-1");
            if (!std::isfinite(stump.threshold) || !std::isfinite(stump.weight))
                throw std::invalid_argument(where + "non-finite stump");
        }
        if (s > 0) {
            const CascadeStage& prev = model.stages[s - 1];
            if (st.weak_learners.size() < prev.weak_learners.size())
                throw std::invalid_argument(where + "fewer weak learners than the previous stage");
            if (st.hog.cell_size > prev.hog.cell_size)
                throw std::invalid_argument(where + "coarser HOG cells than the previous stage");
        }
    }
}

double stage_score(const CascadeStage& stage, const HogDescriptor& d)
{
    double score = 0.0;
    for (const Stump& s : stage.weak_learners) {
        const bool vote = s.polarity * (d.values[static_cast<std::size_t>(s.feature)] - s.threshold) >= 0.0;
        score += vote ? s.weight : -s.weight;
    }
    return score;
}

namespace {

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> values;  // row-major

    double at(std::size_t r, std::size_t f) const { return values[r * dim + f]; }
};

void append_hog(FeatureMatrix& m, const Image& window, const HogParams& p)
{
    const HogDescriptor d = compute_hog(window, p);
    if (m.rows == 0) m.dim = d.size();
    m.values.insert(m.values.end(), d.values.begin(), d.values.end());
    ++m.rows;
}

struct StumpFit {
    Stump stump;
    double error = 1.0;
};

// Best weighted stump over every feature; features are presorted once per stage.
StumpFit best_stump(const FeatureMatrix& x, const std::vector<int>& labels, const std::vector<double>& w,
                    const std::vector<std::vector<std::uint32_t>>& sorted)
{
    double total_pos = 0.0, total_neg = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? total_pos : total_neg) += w[i];
    StumpFit best;
    for (std::size_t f = 0; f < x.dim; ++f) {
        const auto& order = sorted[f];
        double pos_below = 0.0, neg_below = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const std::uint32_t r = order[k];
            (labels[r] > 0 ? pos_below : neg_below) += w[r];
            const double v = x.at(r, f);
            const double next = x.at(order[k + 1], f);
            if (next == v) continue;
            const double err_up = pos_below + (total_neg - neg_below);    // positive when value >= thr
            const double err_down = neg_below + (total_pos - pos_below);  // positive when value <= thr
            if (err_up < best.error) {
                best.error = err_up;
                best.stump = Stump{static_cast<int>(f), 0.5 * (v + next), 1, 0.0};
            }
            if (err_down < best.error) {
                best.error = err_down;
                best.stump = Stump{static_cast<int>(f), 0.5 * (v + next), -1, 0.0};
            }
        }
    }
    return best;
}

}  // namespace

CascadeModel train_cascade(const std::vector<Image>& positives, const std::vector<Image>& negatives,
                           const CascadeTrainConfig& cfg, CascadeTrainTrace* trace)
{
    if (positives.empty()) throw std::invalid_argument("train_cascade: no positive windows");
    if (negatives.empty()) throw std::invalid_argument("train_cascade: no negative windows");
    if (cfg.hog_schedule.empty()) throw std::invalid_argument("train_cascade: empty HOG schedule");
    if (cfg.stages_max < 1 || cfg.max_stumps_per_stage < 1)
        throw std::invalid_argument("train_cascade: stages_max and max_stumps_per_stage must be positive");
    if (!(cfg.min_detection_rate > 0.0 && cfg.min_detection_rate <= 1.0) ||
        !(cfg.max_fp_rate > 0.0 && cfg.max_fp_rate < 1.0))
        throw std::invalid_argument("train_cascade: rates must lie in (0, 1]");
    for (std::size_t s = 0; s < cfg.hog_schedule.size(); ++s) {
        check_hog_geometry(cfg.window_w, cfg.window_h, cfg.hog_schedule[s]);
        if (s > 0 && cfg.hog_schedule[s].cell_size > cfg.hog_schedule[s - 1].cell_size)
            throw std::invalid_argument("train_cascade: HOG schedule must not get coarser");
    }
    for (const auto* set : {&positives, &negatives})
        for (const Image& w : *set)
            if (w.width != cfg.window_w || w.height != cfg.window_h || w.channels != 1)
                throw std::invalid_argument("train_cascade: training window does not match the detector size");

    CascadeModel model;
    model.window_w = cfg.window_w;
    model.window_h = cfg.window_h;

    std::vector<std::size_t> survivors(negatives.size());
    std::iota(survivors.begin(), survivors.end(), 0);
    FeatureMatrix pos_features;
    HogParams pos_params{};
    bool have_pos = false;
    std::size_t min_stumps = 1;

    for (int s = 0; s < cfg.stages_max && !survivors.empty(); ++s) {
        const HogParams& hp = cfg.hog_schedule[std::min<std::size_t>(s, cfg.hog_schedule.size() - 1)];
        if (!have_pos || !(pos_params == hp)) {
            pos_features = {};
            for (const Image& w : positives) append_hog(pos_features, w, hp);
            pos_params = hp;
            have_pos = true;
        }
        const std::size_t m = positives.size();
        const std::size_t l = survivors.size();

        FeatureMatrix x = pos_features;
        for (std::size_t idx : survivors) append_hog(x, negatives[idx], hp);
        std::vector<int> labels(m + l, -1);
        std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(m), 1);

        std::vector<std::vector<std::uint32_t>> sorted(x.dim);
        for (std::size_t f = 0; f < x.dim; ++f) {
            auto& order = sorted[f];
            order.resize(x.rows);
            std::iota(order.begin(), order.end(), 0u);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::uint32_t a, std::uint32_t b) { return x.at(a, f) < x.at(b, f); });
        }

        std::vector<double> weights(x.rows);
        for (std::size_t i = 0; i < x.rows; ++i) weights[i] = labels[i] > 0 ? 0.5 / m : 0.5 / l;
        std::vector<double> scores(x.rows, 0.0);

        CascadeStage stage;
        stage.hog = hp;
        bool met = false;
        CascadeStageReport report;
        for (int t = 0; t < cfg.max_stumps_per_stage; ++t) {
            const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
            for (double& wi : weights) wi /= wsum;
            StumpFit fit = best_stump(x, labels, weights, sorted);
            if (fit.error >= 0.5) break;  // nothing better than chance is left
            const double err = std::max(fit.error, 1e-10);
            fit.stump.weight = 0.5 * std::log((1.0 - err) / err);
            const Stump& st = fit.stump;
            for (std::size_t i = 0; i < x.rows; ++i) {
                const bool vote = st.polarity * (x.at(i, static_cast<std::size_t>(st.feature)) - st.threshold) >= 0.0;
                const double h = vote ? 1.0 : -1.0;
                scores[i] += vote ? st.weight : -st.weight;
                weights[i] *= std::exp(-st.weight * labels[i] * h);
            }
            stage.weak_learners.push_back(st);
            if (stage.weak_learners.size() < min_stumps) continue;

            std::vector<double> pos_scores(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(m));
            std::sort(pos_scores.begin(), pos_scores.end(), std::greater<>());
            const auto need = static_cast<std::size_t>(
                std::max(1.0, std::ceil(cfg.min_detection_rate * static_cast<double>(m) - 1e-9)));
            stage.stage_threshold = pos_scores[need - 1];
            std::size_t fp = 0, tp = 0;
            for (std::size_t i = 0; i < x.rows; ++i) {
                if (scores[i] < stage.stage_threshold) continue;
                (labels[i] > 0 ? tp : fp) += 1;
            }
            report.stumps = static_cast<int>(stage.weak_learners.size());
            report.detection_rate = static_cast<double>(tp) / m;
            report.false_positive_rate = static_cast<double>(fp) / l;
            report.negatives = l;
            if (report.false_positive_rate <= cfg.max_fp_rate) {
                met = true;
                break;
            }
        }
        if (!met)
            throw std::runtime_error("train_cascade: stage " + std::to_string(s) +
                                     " cannot reach false-positive rate " + std::to_string(cfg.max_fp_rate) +
                                     " at detection rate " + std::to_string(cfg.min_detection_rate) +
                                     " within " + std::to_string(cfg.max_stumps_per_stage) + " stumps");

        std::vector<std::size_t> next;
        for (std::size_t k = 0; k < l; ++k)
            if (scores[m + k] >= stage.stage_threshold) next.push_back(survivors[k]);
        survivors = std::move(next);
        min_stumps = stage.weak_learners.size();
        model.stages.push_back(std::move(stage));
        if (trace != nullptr) trace->stages.push_back(report);
    }
    return model;
}

CascadeResult cascade_classify(const CascadeModel& model, const WindowPolar& polar)
{
    if (model.stages.empty()) throw std::invalid_argument("cascade_classify: model has no stages");
    if (polar.width != model.window_w || polar.height != model.window_h)
        throw std::invalid_argument("cascade_classify: window size does not match the model");
    CascadeResult result;
    HogDescriptor descriptor;
    const HogParams* last = nullptr;
    for (std::size_t s = 0; s < model.stages.size(); ++s) {
        const CascadeStage& stage = model.stages[s];
        if (last == nullptr || !(*last == stage.hog)) {
            descriptor = hog_from_polar(polar, stage.hog);
            last = &stage.hog;
        }
        const double score = stage_score(stage, descriptor);
        result.stages_evaluated = static_cast<int>(s + 1);
        result.margin = score - stage.stage_threshold;
        if (score < stage.stage_threshold) {
            result.rejected_at_stage = static_cast<int>(s);
            return result;
        }
    }
    result.accepted = true;
    return result;
}

CascadeResult cascade_classify(const CascadeModel& model, const Image& window)
{
    if (window.channels != 1) throw std::invalid_argument("cascade_classify: expected a single-channel window");
    if (window.width != model.window_w || window.height != model.window_h)
        throw std::invalid_argument("cascade_classify: window size does not match the model");
    const GradientField g = gradient(window);
    const WindowPolar polar{window.width, window.height, g.magnitude, g.orientation};
    return cascade_classify(model, polar);
}

}  // namespace guardscan
