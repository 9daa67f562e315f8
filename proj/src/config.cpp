#include "guardscan/config.hpp"

#include "guardscan/dataset.hpp"
#include "guardscan/model_io.hpp"

#include <stdexcept>

namespace guardscan {

using nlohmann::json;

namespace {

bool compatible(const json& base, const json& value, const std::string& key)
{
    if (base.is_null() || (value.is_null() && key == "tau")) return value.is_null() || value.is_number();
    if (base.is_number()) {
        if (!value.is_number()) return false;
        return base.is_number_float() || !value.is_number_float();
    }
    return base.type() == value.type();
}

const char* type_word(const json& j)
{
    if (j.is_null()) return "a number or null";
    if (j.is_number_float()) return "a number";
    if (j.is_number()) return "an integer";
    return j.type_name();
}

}  // namespace

json config_to_json(const PipelineConfig& c)
{
    json schedule = json::array();
    for (const HogParams& h : c.cascade.hog_schedule) schedule.push_back(hog_params_to_json(h));
    const UbiquityConfig& u = c.spacing.ubiquity;
    return {
        {"scan",
         {{"window_w", c.scan.window_w},
          {"window_h", c.scan.window_h},
          {"stride_x", c.scan.stride_x},
          {"stride_y", c.scan.stride_y},
          {"score_threshold", c.scan.score_threshold},
          {"nms_iou", c.scan.nms_iou}}},
        {"hog", hog_params_to_json(c.hog)},
        {"svm",
         {{"c_grid", c.svm.c_grid},
          {"folds", c.svm.folds},
          {"max_epochs", c.svm.max_epochs},
          {"tolerance", c.svm.tolerance},
          {"seed", c.svm.seed}}},
        {"cascade",
         {{"stages_max", c.cascade.stages_max},
          {"min_detection_rate", c.cascade.min_detection_rate},
          {"max_fp_rate", c.cascade.max_fp_rate},
          {"max_stumps_per_stage", c.cascade.max_stumps_per_stage},
          {"hog_schedule", schedule}}},
        {"mining",
         {{"negatives_per_image", c.mining.negatives_per_image},
          {"hard_negatives_per_post", c.mining.hard_negatives_per_post},
          {"jittered_positives_per_post", c.mining.jittered_positives_per_post},
          {"positive_jitter", c.mining.positive_jitter},
          {"negative_max_iou", c.mining.negative_max_iou},
          {"seed", c.mining.seed}}},
        {"floors",
         {{"grad_threshold", c.floors.segments.grad_threshold},
          {"min_length", c.floors.segments.min_length},
          {"angle_tolerance_deg", c.floors.segments.angle_tolerance_deg},
          {"ransac_iters", c.floors.vanishing.ransac_iters},
          {"inlier_angle_deg", c.floors.vanishing.inlier_angle_deg},
          {"seed", c.floors.vanishing.seed},
          {"intercept_tolerance", c.floors.intercept_tolerance},
          {"slope_tolerance", c.floors.slope_tolerance},
          {"k", c.floors.k},
          {"max_dist", c.floors.max_dist}}},
        {"spacing",
         {{"k_min", c.spacing.k_min},
          {"k_max", c.spacing.k_max},
          {"em_seed", c.spacing.em.seed},
          {"em_tol", c.spacing.em.tol},
          {"em_max_iter", c.spacing.em.max_iter},
          {"variance_floor", c.spacing.em.variance_floor},
          {"bins", u.bins},
          {"s_max", u.s_max},
          {"tau", u.tau ? json(*u.tau) : json(nullptr)},
          {"tau_peak_fraction", u.tau_peak_fraction}}},
        {"eval", {{"iou_threshold", c.eval_iou_threshold}}},
        {"synth", synth_config_to_json(c.synth)},
        {"dataset", {{"n_train", c.n_train}, {"n_test", c.n_test}}},
        {"jobs", c.jobs},
    };
}

void merge_strict(json& base, const json& overlay, const std::string& path)
{
    if (!overlay.is_object()) throw std::invalid_argument("config" + (path.empty() ? "" : " '" + path + "'") + " must be an object");
    for (const auto& [key, value] : overlay.items()) {
        const std::string here = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw std::invalid_argument("unknown config key '" + here + "'");
        json& target = base[key];
        if (target.is_object()) {
            merge_strict(target, value, here);
        } else if (!compatible(target, value, key)) {
            throw std::invalid_argument("config key '" + here + "' must be " + type_word(target));
        } else {
            target = value;
        }
    }
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("override '" + assignment + "' must look like key.path=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json overlay = std::move(value);
    std::size_t end = key.size();
    for (;;) {
        const auto dot = key.rfind('.', end - 1);
        const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
        const std::string part = key.substr(start, end - start);
        if (part.empty()) throw std::invalid_argument("override '" + assignment + "' has an empty key segment");
        overlay = json{{part, std::move(overlay)}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_strict(doc, overlay);
}

PipelineConfig config_from_json(const json& doc)
{
    json full = config_to_json(PipelineConfig{});
    merge_strict(full, doc);
    PipelineConfig c;
    try {
        const json& s = full.at("scan");
        c.scan.window_w = s.at("window_w").get<int>();
        c.scan.window_h = s.at("window_h").get<int>();
        c.scan.stride_x = s.at("stride_x").get<int>();
        c.scan.stride_y = s.at("stride_y").get<int>();
        c.scan.score_threshold = s.at("score_threshold").get<double>();
        c.scan.nms_iou = s.at("nms_iou").get<double>();
        c.hog = hog_params_from_json(full.at("hog"));

        const json& v = full.at("svm");
        c.svm.c_grid = v.at("c_grid").get<std::vector<double>>();
        c.svm.folds = v.at("folds").get<int>();
        c.svm.max_epochs = v.at("max_epochs").get<int>();
        c.svm.tolerance = v.at("tolerance").get<double>();
        c.svm.seed = v.at("seed").get<std::uint64_t>();

        const json& k = full.at("cascade");
        c.cascade.stages_max = k.at("stages_max").get<int>();
        c.cascade.min_detection_rate = k.at("min_detection_rate").get<double>();
        c.cascade.max_fp_rate = k.at("max_fp_rate").get<double>();
        c.cascade.max_stumps_per_stage = k.at("max_stumps_per_stage").get<int>();
        c.cascade.hog_schedule.clear();
        for (const json& h : k.at("hog_schedule")) c.cascade.hog_schedule.push_back(hog_params_from_json(h));
        c.cascade.window_w = c.scan.window_w;
        c.cascade.window_h = c.scan.window_h;

        const json& m = full.at("mining");
        c.mining.negatives_per_image = m.at("negatives_per_image").get<int>();
        c.mining.hard_negatives_per_post = m.at("hard_negatives_per_post").get<int>();
        c.mining.jittered_positives_per_post = m.at("jittered_positives_per_post").get<int>();
        c.mining.positive_jitter = m.at("positive_jitter").get<int>();
        c.mining.negative_max_iou = m.at("negative_max_iou").get<double>();
        c.mining.seed = m.at("seed").get<std::uint64_t>();

        const json& f = full.at("floors");
        c.floors.segments.grad_threshold = f.at("grad_threshold").get<double>();
        c.floors.segments.min_length = f.at("min_length").get<double>();
        c.floors.segments.angle_tolerance_deg = f.at("angle_tolerance_deg").get<double>();
        c.floors.vanishing.ransac_iters = f.at("ransac_iters").get<int>();
        c.floors.vanishing.inlier_angle_deg = f.at("inlier_angle_deg").get<double>();
        c.floors.vanishing.seed = f.at("seed").get<std::uint64_t>();
        c.floors.intercept_tolerance = f.at("intercept_tolerance").get<double>();
        c.floors.slope_tolerance = f.at("slope_tolerance").get<double>();
        c.floors.k = f.at("k").get<int>();
        c.floors.max_dist = f.at("max_dist").get<double>();

        const json& p = full.at("spacing");
        c.spacing.k_min = p.at("k_min").get<int>();
        c.spacing.k_max = p.at("k_max").get<int>();
        c.spacing.em.seed = p.at("em_seed").get<std::uint64_t>();
        c.spacing.em.tol = p.at("em_tol").get<double>();
        c.spacing.em.max_iter = p.at("em_max_iter").get<int>();
        c.spacing.em.variance_floor = p.at("variance_floor").get<double>();
        c.spacing.ubiquity.bins = p.at("bins").get<int>();
        c.spacing.ubiquity.s_max = p.at("s_max").get<double>();
        if (!p.at("tau").is_null()) c.spacing.ubiquity.tau = p.at("tau").get<double>();
        c.spacing.ubiquity.tau_peak_fraction = p.at("tau_peak_fraction").get<double>();

        c.eval_iou_threshold = full.at("eval").at("iou_threshold").get<double>();
        c.synth = synth_config_from_json(full.at("synth"));
        c.n_train = full.at("dataset").at("n_train").get<int>();
        c.n_test = full.at("dataset").at("n_test").get<int>();
        c.jobs = full.at("jobs").get<int>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("invalid config: ") + e.what());
    }

    c.scan.validate();
    check_hog_geometry(c.scan.window_w, c.scan.window_h, c.hog);
    if (c.svm.c_grid.empty() || c.svm.folds < 2) throw std::invalid_argument("svm: need a non-empty c_grid and folds >= 2");
    if (c.cascade.hog_schedule.empty()) throw std::invalid_argument("cascade: hog_schedule must not be empty");
    if (c.spacing.k_min < 1 || c.spacing.k_max < c.spacing.k_min)
        throw std::invalid_argument("spacing: need 1 <= k_min <= k_max");
    if (!(c.eval_iou_threshold > 0.0 && c.eval_iou_threshold <= 1.0))
        throw std::invalid_argument("eval: iou_threshold must lie in (0, 1]");
    if (c.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
    if (c.n_train < 0 || c.n_test < 0) throw std::invalid_argument("dataset: split sizes must be non-negative");
    return c;
}

PipelineConfig resolve_config(const std::filesystem::path* file, const std::vector<std::string>& overrides)
{
    json doc = config_to_json(PipelineConfig{});
    if (file) {
        if (!std::filesystem::exists(*file)) throw std::runtime_error("config file not found: '" + file->string() + "'");
        json from_file = json::parse(read_file(*file), nullptr, false);
        if (from_file.is_discarded()) throw std::invalid_argument("config file '" + file->string() + "' is not valid JSON");
        merge_strict(doc, from_file);
    }
    for (const std::string& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

}  // namespace guardscan
