#pragma once

#include "guardscan/cascade.hpp"
#include "guardscan/detector.hpp"
#include "guardscan/floors.hpp"
#include "guardscan/hog.hpp"
#include "guardscan/spacing.hpp"
#include "guardscan/synthgen.hpp"
#include "guardscan/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace guardscan {

struct SvmSearchConfig {
    std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0};
    int folds = 3;
    int max_epochs = 300;
    double tolerance = 1e-3;
    std::uint64_t seed = 0;
};

struct SpacingFitConfig {
    int k_min = 1;
    int k_max = 5;
    EmConfig em;
    UbiquityConfig ubiquity;
};

/// Every knob of the pipeline in one document. All fields have defaults.
struct PipelineConfig {
    ScanParams scan;
    HogParams hog;
    SvmSearchConfig svm;
    CascadeTrainConfig cascade;
    MiningConfig mining;
    FloorConfig floors;
    SpacingFitConfig spacing;
    double eval_iou_threshold = 0.5;
    SynthConfig synth;
    int n_train = 30;
    int n_test = 10;
    int jobs = 1;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);

/// Overlays `doc` on the defaults. Unknown keys and type mismatches throw
/// std::invalid_argument naming the offending path.
PipelineConfig config_from_json(const nlohmann::json& doc);

/// Recursively overlays `overlay` onto `base`, rejecting keys absent from base.
void merge_strict(nlohmann::json& base, const nlohmann::json& overlay, const std::string& path = "");

/// Applies "a.b.c=value"; the value is parsed as JSON and falls back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// defaults <- file (if given) <- overrides, in increasing precedence.
PipelineConfig resolve_config(const std::filesystem::path* file,
                              const std::vector<std::string>& overrides);

}  // namespace guardscan
