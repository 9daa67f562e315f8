#pragma once

#include "guardscan/hog.hpp"
#include "guardscan/image.hpp"

#include <vector>

namespace guardscan {

/// Decision stump over one HOG entry: votes +1 when polarity * (value - threshold) >= 0.
struct Stump {
    int feature = 0;
    double threshold = 0.0;
    int polarity = 1;
    double weight = 0.0;

    bool operator==(const Stump&) const = default;
};

struct CascadeStage {
    std::vector<Stump> weak_learners;
    double stage_threshold = 0.0;
    HogParams hog;

    bool operator==(const CascadeStage&) const = default;
};

struct CascadeModel {
    std::vector<CascadeStage> stages;
    int window_w = 0;
    int window_h = 0;

    bool operator==(const CascadeModel&) const = default;
};

/// Throws std::invalid_argument if the model breaks a structural invariant: no stages,
/// decreasing stump counts, coarser cells in a later stage, or window/HOG mismatch.
void validate_cascade(const CascadeModel& model);

struct CascadeTrainConfig {
    int stages_max = 6;
    double min_detection_rate = 0.995;
    double max_fp_rate = 0.5;
    int max_stumps_per_stage = 200;
    /// HOG parameters per stage; stages past the end reuse the last entry.
    std::vector<HogParams> hog_schedule{HogParams{12, 2, 1, 9, 1e-6}, HogParams{8, 2, 1, 9, 1e-6},
                                        HogParams{8, 2, 1, 9, 1e-6}};
    int window_w = 24;
    int window_h = 72;
};

struct CascadeStageReport {
    int stumps = 0;
    double detection_rate = 0.0;
    double false_positive_rate = 0.0;
    std::size_t negatives = 0;
};

struct CascadeTrainTrace {
    std::vector<CascadeStageReport> stages;
};

/// Viola-Jones style training: each stage boosts stumps on its own HOG features until the
/// stage, thresholded to keep min_detection_rate of the positives, passes at most
/// max_fp_rate of the negatives still alive. Survivors train the next stage.
CascadeModel train_cascade(const std::vector<Image>& positives, const std::vector<Image>& negatives,
                           const CascadeTrainConfig& cfg, CascadeTrainTrace* trace = nullptr);

struct CascadeResult {
    bool accepted = false;
    double margin = 0.0;         // last evaluated stage: score - threshold
    int rejected_at_stage = -1;  // -1 when accepted
    int stages_evaluated = 0;
};

CascadeResult cascade_classify(const CascadeModel& model, const Image& window);
CascadeResult cascade_classify(const CascadeModel& model, const WindowPolar& polar);

/// Sum of stump votes of one stage on a descriptor.
double stage_score(const CascadeStage& stage, const HogDescriptor& d);

}  // namespace guardscan
