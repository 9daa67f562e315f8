#pragma once

#include "guardscan/hog.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace guardscan {

struct SvmTrainConfig {
    double c = 1.0;
    std::uint64_t seed = 0;
    int max_epochs = 1000;
    double tolerance = 1e-4;  // relative duality gap

    bool operator==(const SvmTrainConfig&) const = default;
};

/// Feature vectors with +1 / -1 labels. Rows are stored contiguously.
struct LabeledWindowSet {
    std::size_t feature_dim = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const
    {
        return {features.data() + i * feature_dim, feature_dim};
    }
    void add(std::span<const double> x, int label);
    /// Throws std::invalid_argument on inconsistent lengths or labels other than +-1.
    void validate() const;
};

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::size_t feature_dim = 0;
    SvmTrainConfig train_config;
    HogParams hog;
    int window_w = 0;
    int window_h = 0;

    bool operator==(const LinearSvmModel&) const = default;
};

/// Per-epoch dual objective (minimisation form, 0.5 |w|^2 - sum alpha) and duality gap.
struct SvmTrainTrace {
    std::vector<double> dual_objective;
    std::vector<double> duality_gap;
    int epochs = 0;
};

/// L2-regularised hinge loss by dual coordinate descent. The bias is learned as the weight of
/// a constant unit feature. Coordinates are visited cyclically in one seeded permutation.
LinearSvmModel train_linear_svm(const LabeledWindowSet& data, const SvmTrainConfig& cfg,
                                SvmTrainTrace* trace = nullptr);

double svm_score(const LinearSvmModel& model, std::span<const double> descriptor);
inline double svm_score(const LinearSvmModel& model, const HogDescriptor& d)
{
    return svm_score(model, d.values);
}

struct GridSearchRow {
    double c = 0.0;
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
};

struct GridSearchResult {
    double best_c = 0.0;
    std::vector<GridSearchRow> table;
    int trainings = 0;
};

/// Stratified k-fold cross-validation over C. Ties in mean accuracy go to the smaller C.
GridSearchResult grid_search_cv(const LabeledWindowSet& data, std::span<const double> c_grid,
                                int folds, std::uint64_t seed, const SvmTrainConfig& base = {});

}  // namespace guardscan
