#include "guardscan/pipeline.hpp"

#include "guardscan/detector.hpp"
#include "guardscan/image_io.hpp"
#include "guardscan/log.hpp"
#include "guardscan/training.hpp"

#include <map>
#include <stdexcept>

namespace guardscan {

std::string StageCombo::label() const
{
    std::string s = kind == ClassifierKind::cascade ? "Cascade Classifier" : "Linear SVM";
    if (floor) s += " and Floor Detection";
    if (spacing) s += " and Space Estimation";
    return s;
}

std::vector<StageCombo> all_stage_combos()
{
    return {{ClassifierKind::cascade, false, false}, {ClassifierKind::svm, false, false},
            {ClassifierKind::cascade, true, false},  {ClassifierKind::svm, true, false},
            {ClassifierKind::cascade, true, true},   {ClassifierKind::svm, true, true}};
}

std::vector<StageCombo> stage_combos(const std::string& stages, const std::string& classifier)
{
    if (stages != "all" && stages != "raw" && stages != "floor" && stages != "spacing")
        throw std::invalid_argument("--stages must be one of all, raw, floor, spacing");
    if (classifier != "both" && classifier != "cascade" && classifier != "svm")
        throw std::invalid_argument("--classifier must be one of both, cascade, svm");
    std::vector<StageCombo> out;
    for (const StageCombo& c : all_stage_combos()) {
        if (classifier == "cascade" && c.kind != ClassifierKind::cascade) continue;
        if (classifier == "svm" && c.kind != ClassifierKind::svm) continue;
        const std::string level = c.spacing ? "spacing" : c.floor ? "floor" : "raw";
        if (stages != "all" && stages != level) continue;
        out.push_back(c);
    }
    return out;
}

ImageStages run_stages(const Image& img, const WindowClassifier& model, const std::optional<UbiquityTable>& table,
                       const PipelineConfig& cfg)
{
    ImageStages out;
    const Image gray = to_grayscale(img);
    out.raw = detect(gray, model, cfg.scan, cfg.jobs);
    out.floors = detect_floors(gray, cfg.floors);
    out.floor_filtered = filter_by_floor(out.raw, out.floors, cfg.floors.max_dist);
    out.spacing_selected = table ? apply_spacing(out.floor_filtered, out.floors, *table) : out.floor_filtered;
    return out;
}

std::vector<double> training_spacings(const Dataset& ds)
{
    std::vector<double> samples;
    for (const DatasetEntry& e : ds.train) {
        std::map<int, std::vector<BoundingBox>> by_floor;
        for (const BoundingBox& b : e.posts) by_floor[e.floors.empty() ? 0 : nearest_floor(b, e.floors)].push_back(b);
        const std::vector<double> s = normalized_spacings(by_floor);
        samples.insert(samples.end(), s.begin(), s.end());
    }
    return samples;
}

SpacingModel fit_spacing_model(const Dataset& ds, const SpacingFitConfig& cfg)
{
    const std::vector<double> samples = training_spacings(ds);
    if (samples.empty()) throw std::runtime_error("no spacing samples in the training split");
    SpacingModel m;
    const BicChoice choice = select_k_bic(samples, cfg.k_min, cfg.k_max, cfg.em);
    log::info("spacing model: {} samples, k = {}", samples.size(), choice.k);
    m.gmm = choice.model;
    m.table = build_ubiquity_table(m.gmm, cfg.ubiquity);
    return m;
}

WindowSamples mine_dataset_windows(const Dataset& ds, const PipelineConfig& cfg)
{
    std::vector<AnnotatedImage> images;
    for (const DatasetEntry& e : ds.train) images.push_back({e.image, load_image(ds.image_path(e)), e.posts});
    if (images.empty()) throw std::runtime_error("the training split is empty");
    return mine_windows(images, cfg.scan.window_w, cfg.scan.window_h, cfg.mining);
}

LinearSvmModel train_svm_from_samples(const WindowSamples& samples, const PipelineConfig& cfg,
                                      GridSearchResult* search)
{
    const LabeledWindowSet data = hog_dataset(samples, cfg.hog);
    SvmTrainConfig base;
    base.seed = cfg.svm.seed;
    base.max_epochs = cfg.svm.max_epochs;
    base.tolerance = cfg.svm.tolerance;
    const GridSearchResult gs = grid_search_cv(data, cfg.svm.c_grid, cfg.svm.folds, cfg.svm.seed, base);
    log::info("svm grid search: best C = {}", gs.best_c);
    SvmTrainConfig final_cfg = base;
    final_cfg.c = gs.best_c;
    LinearSvmModel model = train_linear_svm(data, final_cfg);
    model.hog = cfg.hog;
    model.window_w = cfg.scan.window_w;
    model.window_h = cfg.scan.window_h;
    if (search) *search = gs;
    return model;
}

std::vector<EvalReport> evaluate_pipeline(const Dataset& ds, const std::vector<StageCombo>& combos,
                                          const PipelineModels& models, const PipelineConfig& cfg,
                                          std::vector<ImageRecord>* records)
{
    bool need_cascade = false;
    bool need_svm = false;
    bool need_spacing = false;
    for (const StageCombo& c : combos) {
        (c.kind == ClassifierKind::cascade ? need_cascade : need_svm) = true;
        need_spacing = need_spacing || c.spacing;
    }
    if (need_cascade && !models.cascade) throw std::runtime_error("a cascade model is required");
    if (need_svm && !models.svm) throw std::runtime_error("an SVM model is required");
    if (need_spacing && !models.spacing) throw std::runtime_error("a spacing model is required");

    std::optional<UbiquityTable> table;
    if (models.spacing) table = models.spacing->table;
    std::vector<std::vector<ImageCounts>> counts(combos.size());
    for (const DatasetEntry& e : ds.test) {
        const Image img = load_image(ds.image_path(e));
        std::optional<ImageStages> cascade_stages;
        std::optional<ImageStages> svm_stages;
        if (need_cascade) cascade_stages = run_stages(img, *models.cascade, table, cfg);
        if (need_svm) svm_stages = run_stages(img, *models.svm, table, cfg);
        for (std::size_t i = 0; i < combos.size(); ++i) {
            const StageCombo& c = combos[i];
            const ImageStages& st = c.kind == ClassifierKind::cascade ? *cascade_stages : *svm_stages;
            const std::vector<Detection>& dets = c.spacing ? st.spacing_selected : c.floor ? st.floor_filtered : st.raw;
            const MatchResult m = match_detections(dets, e.posts, cfg.eval_iou_threshold);
            counts[i].push_back({e.image, m.tp, m.fp, m.fn});
            if (records) records->push_back({e.image, c.label(), dets, e.posts, st.floors});
        }
    }
    std::vector<EvalReport> out;
    for (std::size_t i = 0; i < combos.size(); ++i) out.push_back(aggregate(combos[i].label(), std::move(counts[i])));
    return out;
}

}  // namespace guardscan
