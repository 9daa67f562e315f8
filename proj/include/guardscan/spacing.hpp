#pragma once

#include "guardscan/floors.hpp"
#include "guardscan/geometry.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace guardscan {

struct GmmComponent {
    double weight = 0.0;
    double mean = 0.0;
    double variance = 0.0;

    bool operator==(const GmmComponent&) const = default;
};

struct GmmModel {
    std::vector<GmmComponent> components;

    int k() const { return static_cast<int>(components.size()); }
    double density(double x) const;
    double log_likelihood(const std::vector<double>& xs) const;
    /// Throws std::invalid_argument if weights do not sum to one or a variance is non-positive.
    void validate() const;

    bool operator==(const GmmModel&) const = default;
};

struct EmConfig {
    std::uint64_t seed = 0;
    double tol = 1e-6;
    int max_iter = 500;
    double variance_floor = 1e-4;
};

struct EmTrace {
    std::vector<double> log_likelihood;  // after initialisation and after every iteration
    std::vector<double> weight_sums;     // after every M-step
    int iterations = 0;
};

/// Center-x gaps between neighbours on each floor, divided by that floor's median gap.
std::vector<double> normalized_spacings(const std::map<int, std::vector<BoundingBox>>& boxes_by_floor);

/// Expectation-maximisation from a k-means++ start. Throws std::invalid_argument when there
/// are fewer samples than components or every sample is identical while k > 1.
GmmModel fit_gmm_em(const std::vector<double>& samples, int k, const EmConfig& cfg,
                    EmTrace* trace = nullptr);

struct BicChoice {
    int k = 0;
    GmmModel model;
    std::vector<double> bic;  // one entry per tried k, in order
};

/// BIC = -2 log L + (3k - 1) ln n; ties go to the smaller k.
BicChoice select_k_bic(const std::vector<double>& samples, int k_min, int k_max, const EmConfig& cfg);

struct UbiquityConfig {
    int bins = 200;
    double s_max = 4.0;
    /// Penalty subtracted from the density. When unset, tau_peak_fraction * peak density.
    std::optional<double> tau;
    double tau_peak_fraction = 0.25;
};

struct UbiquityTable {
    std::vector<double> bin_edges;
    std::vector<double> values;
    double tau = 0.0;

    /// Value of the bin holding s; outside [0, s_max] the nearest edge bin.
    double lookup(double s) const;
};

UbiquityTable build_ubiquity_table(const GmmModel& model, const UbiquityConfig& cfg);

/// GMM plus the table built from it; the persisted spacing model.
struct SpacingModel {
    GmmModel gmm;
    UbiquityTable table;
};

/// Plot data: one row per bin over [0, s_max] with the sample density, each weighted component
/// density and the mixture density at the bin centre.
std::string spacing_histogram_csv(const std::vector<double>& samples, const GmmModel& model, int bins,
                                  double s_max);

struct ChainResult {
    std::vector<Detection> kept;
    std::vector<int> kept_indices;  // into the center-x sorted order
    double objective = 0.0;
};

/// Detections of one floor sorted by center x (ties by y, then input order).
std::vector<Detection> sort_by_center_x(std::vector<Detection> dets);

/// Maximum-ubiquity chain by dynamic programming over "best chain ending at i". Spacings are
/// normalised by the median gap of the full candidate list. A non-positive optimum keeps only
/// the best-scored detection (leftmost on ties); fewer than two detections pass through.
ChainResult select_best_combination_detailed(const std::vector<Detection>& dets_on_floor,
                                             const UbiquityTable& table);

std::vector<Detection> select_best_combination(const std::vector<Detection>& dets_on_floor,
                                               const UbiquityTable& table);

/// Groups detections by nearest floor and runs the chain selection on each floor.
/// Detections without any floor are returned as they are. Output is in detection_order.
std::vector<Detection> apply_spacing(const std::vector<Detection>& dets,
                                     const std::vector<FloorLine>& floors, const UbiquityTable& table);

}  // namespace guardscan
