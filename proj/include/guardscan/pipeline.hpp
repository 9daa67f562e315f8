#pragma once

#include "guardscan/config.hpp"
#include "guardscan/dataset.hpp"
#include "guardscan/eval.hpp"
#include "guardscan/floors.hpp"
#include "guardscan/model_io.hpp"
#include "guardscan/spacing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace guardscan {

enum class ClassifierKind { cascade, svm };

/// One row of the summary table: a classifier with optional floor and spacing stages.
struct StageCombo {
    ClassifierKind kind = ClassifierKind::cascade;
    bool floor = false;
    bool spacing = false;

    std::string label() const;
};

/// The six rows of the summary, in table order.
std::vector<StageCombo> all_stage_combos();

/// Parses --stages / --classifier selections: stages in {all, raw, floor, spacing},
/// classifier in {both, cascade, svm}.
std::vector<StageCombo> stage_combos(const std::string& stages, const std::string& classifier);

struct ImageStages {
    std::vector<FloorLine> floors;
    std::vector<Detection> raw;
    std::vector<Detection> floor_filtered;
    std::vector<Detection> spacing_selected;
};

ImageStages run_stages(const Image& img, const WindowClassifier& model,
                       const std::optional<UbiquityTable>& table, const PipelineConfig& cfg);

/// Normalised spacings of the training annotations, posts assigned to the nearest annotated floor.
std::vector<double> training_spacings(const Dataset& ds);

/// Spacing model fitted on the training annotations of a dataset. Posts are assigned to the
/// nearest annotated floor.
SpacingModel fit_spacing_model(const Dataset& ds, const SpacingFitConfig& cfg);

/// Training windows mined from the training split.
WindowSamples mine_dataset_windows(const Dataset& ds, const PipelineConfig& cfg);

LinearSvmModel train_svm_from_samples(const WindowSamples& samples, const PipelineConfig& cfg,
                                      GridSearchResult* search = nullptr);

struct PipelineModels {
    std::optional<CascadeModel> cascade;
    std::optional<LinearSvmModel> svm;
    std::optional<SpacingModel> spacing;
};

struct ImageRecord {
    std::string image;
    std::string label;
    std::vector<Detection> detections;
    std::vector<BoundingBox> ground_truth;
    std::vector<FloorLine> floors;
};

/// Runs every requested combination on the test split and micro-averages the counts.
/// `records`, when given, receives each image's final detections per combination.
std::vector<EvalReport> evaluate_pipeline(const Dataset& ds, const std::vector<StageCombo>& combos,
                                          const PipelineModels& models, const PipelineConfig& cfg,
                                          std::vector<ImageRecord>* records = nullptr);

}  // namespace guardscan
