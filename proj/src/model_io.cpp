#include "guardscan/model_io.hpp"

#include "guardscan/dataset.hpp"

#include <stdexcept>

namespace guardscan {

using nlohmann::json;

json hog_params_to_json(const HogParams& p)
{
    return {{"cell_size", p.cell_size},
            {"block_size", p.block_size},
            {"block_stride", p.block_stride},
            {"bins", p.bins},
            {"epsilon", p.epsilon}};
}

HogParams hog_params_from_json(const json& j)
{
    HogParams p;
    p.cell_size = j.at("cell_size").get<int>();
    p.block_size = j.at("block_size").get<int>();
    p.block_stride = j.at("block_stride").get<int>();
    p.bins = j.at("bins").get<int>();
    p.epsilon = j.at("epsilon").get<double>();
    return p;
}

json model_to_json(const LinearSvmModel& m)
{
    return {{"format_version", kModelFormatVersion},
            {"kind", "svm"},
            {"window", {{"w", m.window_w}, {"h", m.window_h}}},
            {"hog_params", hog_params_to_json(m.hog)},
            {"payload",
             {{"feature_dim", m.feature_dim},
              {"weights", m.weights},
              {"bias", m.bias},
              {"train_config",
               {{"C", m.train_config.c},
                {"seed", m.train_config.seed},
                {"max_epochs", m.train_config.max_epochs},
                {"tolerance", m.train_config.tolerance}}}}}};
}

json model_to_json(const CascadeModel& m)
{
    json stages = json::array();
    json hogs = json::array();
    for (const CascadeStage& s : m.stages) {
        json stumps = json::array();
        for (const Stump& t : s.weak_learners)
            stumps.push_back({{"feature", t.feature}, {"threshold", t.threshold}, {"polarity", t.polarity},
                              {"weight", t.weight}});
        stages.push_back({{"stage_threshold", s.stage_threshold}, {"weak_learners", std::move(stumps)}});
        hogs.push_back(hog_params_to_json(s.hog));
    }
    return {{"format_version", kModelFormatVersion},
            {"kind", "cascade"},
            {"window", {{"w", m.window_w}, {"h", m.window_h}}},
            {"hog_params", std::move(hogs)},
            {"payload", {{"stages", std::move(stages)}}}};
}

json model_to_json(const WindowClassifier& m)
{
    return std::visit([](const auto& model) { return model_to_json(model); }, m);
}

WindowClassifier model_from_json(const json& j)
{
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw std::invalid_argument("unsupported model format_version " + std::to_string(version));
        const std::string kind = j.at("kind").get<std::string>();
        const json& payload = j.at("payload");
        const int ww = j.at("window").at("w").get<int>();
        const int wh = j.at("window").at("h").get<int>();
        if (kind == "svm") {
            LinearSvmModel m;
            m.window_w = ww;
            m.window_h = wh;
            m.hog = hog_params_from_json(j.at("hog_params"));
            m.feature_dim = payload.at("feature_dim").get<std::size_t>();
            m.weights = payload.at("weights").get<std::vector<double>>();
            m.bias = payload.at("bias").get<double>();
            const json& tc = payload.at("train_config");
            m.train_config.c = tc.at("C").get<double>();
            m.train_config.seed = tc.at("seed").get<std::uint64_t>();
            m.train_config.max_epochs = tc.at("max_epochs").get<int>();
            m.train_config.tolerance = tc.at("tolerance").get<double>();
            if (m.weights.size() != m.feature_dim)
                throw std::invalid_argument("svm weights length differs from feature_dim");
            if (m.feature_dim != hog_length(ww, wh, m.hog))
                throw std::invalid_argument("svm feature_dim does not match its HOG parameters");
            return m;
        }
        if (kind == "cascade") {
            CascadeModel m;
            m.window_w = ww;
            m.window_h = wh;
            const json& hogs = j.at("hog_params");
            const json& stages = payload.at("stages");
            if (hogs.size() != stages.size())
                throw std::invalid_argument("cascade hog_params and stages differ in length");
            for (std::size_t s = 0; s < stages.size(); ++s) {
                CascadeStage st;
                st.hog = hog_params_from_json(hogs[s]);
                st.stage_threshold = stages[s].at("stage_threshold").get<double>();
                for (const json& t : stages[s].at("weak_learners"))
                    st.weak_learners.push_back(Stump{t.at("feature").get<int>(), t.at("threshold").get<double>(),
                                                     t.at("polarity").get<int>(), t.at("weight").get<double>()});
                m.stages.push_back(std::move(st));
            }
            validate_cascade(m);
            return m;
        }
        throw std::invalid_argument("unknown model kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const WindowClassifier& m, const std::filesystem::path& path)
{
    write_file_atomic(path, model_to_json(m).dump(1) + "\n");
}

WindowClassifier load_model(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) throw std::runtime_error("model file not found: '" + path.string() + "'");
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("cannot parse model '" + path.string() + "': " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("invalid model '" + path.string() + "': " + e.what());
    }
}

json spacing_model_to_json(const SpacingModel& m)
{
    json comps = json::array();
    for (const GmmComponent& c : m.gmm.components)
        comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
    return {{"format_version", kModelFormatVersion},
            {"kind", "spacing"},
            {"payload",
             {{"components", std::move(comps)},
              {"bin_edges", m.table.bin_edges},
              {"values", m.table.values},
              {"tau", m.table.tau}}}};
}

SpacingModel spacing_model_from_json(const json& j)
{
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion || j.at("kind").get<std::string>() != "spacing")
            throw std::invalid_argument("not a spacing model document of a supported version");
        const json& p = j.at("payload");
        SpacingModel m;
        for (const json& c : p.at("components"))
            m.gmm.components.push_back(
                {c.at("weight").get<double>(), c.at("mean").get<double>(), c.at("variance").get<double>()});
        m.gmm.validate();
        m.table.bin_edges = p.at("bin_edges").get<std::vector<double>>();
        m.table.values = p.at("values").get<std::vector<double>>();
        m.table.tau = p.at("tau").get<double>();
        if (m.table.values.empty() || m.table.bin_edges.size() != m.table.values.size() + 1)
            throw std::invalid_argument("ubiquity table needs one more edge than values");
        return m;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed spacing model: ") + e.what());
    }
}

void save_spacing_model(const SpacingModel& m, const std::filesystem::path& path)
{
    write_file_atomic(path, spacing_model_to_json(m).dump(1) + "\n");
}

SpacingModel load_spacing_model(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        throw std::runtime_error("spacing model file not found: '" + path.string() + "'");
    try {
        return spacing_model_from_json(json::parse(read_file(path)));
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid spacing model '" + path.string() + "': " + e.what());
    }
}

}  // namespace guardscan
