#include "guardscan/svm.hpp"

#include "guardscan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace guardscan {

void LabeledWindowSet::add(std::span<const double> x, int label)
{
    if (labels.empty() && feature_dim == 0) feature_dim = x.size();
    if (x.size() != feature_dim) throw std::invalid_argument("LabeledWindowSet: feature dimension mismatch");
    if (label != 1 && label != -1) throw std::invalid_argument("LabeledWindowSet: labels must be +1 or -1");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

void LabeledWindowSet::validate() const
{
    if (features.size() != labels.size() * feature_dim)
        throw std::invalid_argument("LabeledWindowSet: feature and label counts differ");
    for (int y : labels)
        if (y != 1 && y != -1) throw std::invalid_argument("LabeledWindowSet: labels must be +1 or -1");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

LinearSvmModel train_linear_svm(const LabeledWindowSet& data, const SvmTrainConfig& cfg, SvmTrainTrace* trace)
{
    data.validate();
    if (!(cfg.c > 0.0)) throw std::invalid_argument("train_linear_svm: C must be positive");
    if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("train_linear_svm: tolerance must be positive");
    const std::size_t n = data.size();
    const bool has_pos = std::find(data.labels.begin(), data.labels.end(), 1) != data.labels.end();
    const bool has_neg = std::find(data.labels.begin(), data.labels.end(), -1) != data.labels.end();
    if (!has_pos || !has_neg) throw std::invalid_argument("train_linear_svm: single-class training set");

    const std::size_t d = data.feature_dim;
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        q[i] = dot(x, x) + 1.0;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);
    rng.shuffle(std::span<std::size_t>(order));  // one visiting order, cycled every epoch

    int epoch = 0;
    for (; epoch < cfg.max_epochs; ++epoch) {
        for (std::size_t i : order) {
            const auto x = data.row(i);
            const double y = data.labels[i];
            const double grad = y * (dot(w, x) + b) - 1.0;
            const double old = alpha[i];
            const double next = std::clamp(old - grad / q[i], 0.0, cfg.c);
            if (next == old) continue;
            alpha[i] = next;
            const double delta = (next - old) * y;
            for (std::size_t k = 0; k < d; ++k) w[k] += delta * x[k];
            b += delta;
        }

        const double half_norm = 0.5 * (dot(w, w) + b * b);
        double alpha_sum = 0.0;
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            alpha_sum += alpha[i];
            hinge += std::max(0.0, 1.0 - data.labels[i] * (dot(w, data.row(i)) + b));
        }
        const double dual = half_norm - alpha_sum;
        const double primal = half_norm + cfg.c * hinge;
        const double gap = primal + dual;
        if (trace != nullptr) {
            trace->dual_objective.push_back(dual);
            trace->duality_gap.push_back(gap);
        }
        if (gap <= cfg.tolerance * primal) {
            ++epoch;
            break;
        }
    }
    if (trace != nullptr) trace->epochs = epoch;

    LinearSvmModel model;
    model.weights = std::move(w);
    model.bias = b;
    model.feature_dim = d;
    model.train_config = cfg;
    return model;
}

double svm_score(const LinearSvmModel& model, std::span<const double> descriptor)
{
    if (descriptor.size() != model.feature_dim || model.weights.size() != model.feature_dim)
        throw std::invalid_argument("svm_score: descriptor has " + std::to_string(descriptor.size()) +
                                    " entries, model expects " + std::to_string(model.feature_dim));
    return dot(model.weights, descriptor) + model.bias;
}

namespace {

LabeledWindowSet subset(const LabeledWindowSet& data, const std::vector<std::size_t>& rows)
{
    LabeledWindowSet out;
    out.feature_dim = data.feature_dim;
    out.features.reserve(rows.size() * data.feature_dim);
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.add(data.row(r), data.labels[r]);
    return out;
}

}  // namespace

GridSearchResult grid_search_cv(const LabeledWindowSet& data, std::span<const double> c_grid, int folds,
                                std::uint64_t seed, const SvmTrainConfig& base)
{
    data.validate();
    if (c_grid.empty()) throw std::invalid_argument("grid_search_cv: empty C grid");
    if (folds < 2) throw std::invalid_argument("grid_search_cv: need at least 2 folds");
    if (data.size() < static_cast<std::size_t>(folds))
        throw std::invalid_argument("grid_search_cv: too few samples for the requested folds");

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.size(); ++i) (data.labels[i] > 0 ? pos : neg).push_back(i);
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(pos));
    rng.shuffle(std::span<std::size_t>(neg));
    std::vector<int> fold_of(data.size());
    for (std::size_t k = 0; k < pos.size(); ++k) fold_of[pos[k]] = static_cast<int>(k % folds);
    for (std::size_t k = 0; k < neg.size(); ++k) fold_of[neg[k]] = static_cast<int>(k % folds);

    std::vector<LabeledWindowSet> train_sets, valid_sets;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? va : tr).push_back(i);
        train_sets.push_back(subset(data, tr));
        valid_sets.push_back(subset(data, va));
    }

    GridSearchResult result;
    double best_mean = -1.0;
    for (double c : c_grid) {
        GridSearchRow row;
        row.c = c;
        for (int f = 0; f < folds; ++f) {
            SvmTrainConfig cfg = base;
            cfg.c = c;
            const LinearSvmModel model = train_linear_svm(train_sets[f], cfg);
            ++result.trainings;
            const LabeledWindowSet& va = valid_sets[f];
            std::size_t correct = 0;
            for (std::size_t i = 0; i < va.size(); ++i) {
                const int predicted = svm_score(model, va.row(i)) >= 0.0 ? 1 : -1;
                if (predicted == va.labels[i]) ++correct;
            }
            row.fold_accuracy.push_back(va.size() == 0 ? 0.0 : static_cast<double>(correct) / va.size());
        }
        row.mean_accuracy = std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) / folds;
        if (row.mean_accuracy > best_mean || (row.mean_accuracy == best_mean && c < result.best_c)) {
            best_mean = row.mean_accuracy;
            result.best_c = c;
        }
        result.table.push_back(std::move(row));
    }
    return result;
}

}  // namespace guardscan
