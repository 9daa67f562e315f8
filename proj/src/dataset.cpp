#include "guardscan/dataset.hpp"

#include "guardscan/image_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace guardscan {

using nlohmann::json;

namespace {

json box_to_json(const BoundingBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

BoundingBox box_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x, y, w, h]");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

json boxes_to_json(const std::vector<BoundingBox>& boxes)
{
    json a = json::array();
    for (const BoundingBox& b : boxes) a.push_back(box_to_json(b));
    return a;
}

json floors_to_json(const std::vector<FloorLine>& floors)
{
    json a = json::array();
    for (const FloorLine& f : floors) a.push_back({{"slope", f.slope}, {"intercept", f.intercept}});
    return a;
}

std::vector<std::string> split_lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(line);
    return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json synth_config_to_json(const SynthConfig& c)
{
    json comps = json::array();
    for (const GmmComponent& g : c.spacing_model.components)
        comps.push_back({{"weight", g.weight}, {"mean", g.mean}, {"variance", g.variance}});
    return {{"image_w", c.image_w},
            {"image_h", c.image_h},
            {"floor_ys", c.floor_ys},
            {"slab_thickness", c.slab_thickness},
            {"posts_per_floor", c.posts_per_floor},
            {"post_w", c.post_w},
            {"post_h", c.post_h},
            {"bar_w", c.bar_w},
            {"bar_top_margin", c.bar_top_margin},
            {"margin", c.margin},
            {"base_spacing", c.base_spacing},
            {"spacing_model", comps},
            {"missing_prob", c.missing_prob},
            {"noise_sigma", c.noise_sigma},
            {"tilt_deg", c.tilt_deg},
            {"background", c.background},
            {"post_intensity", c.post_intensity},
            {"floor_intensity", c.floor_intensity},
            {"rail", c.rail},
            {"wall_clutter", c.wall_clutter},
            {"floor_clutter", c.floor_clutter},
            {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const json& j)
{
    SynthConfig c;
    c.image_w = j.at("image_w").get<int>();
    c.image_h = j.at("image_h").get<int>();
    c.floor_ys = j.at("floor_ys").get<std::vector<int>>();
    c.slab_thickness = j.at("slab_thickness").get<int>();
    c.posts_per_floor = j.at("posts_per_floor").get<int>();
    c.post_w = j.at("post_w").get<int>();
    c.post_h = j.at("post_h").get<int>();
    c.bar_w = j.at("bar_w").get<int>();
    c.bar_top_margin = j.at("bar_top_margin").get<int>();
    c.margin = j.at("margin").get<int>();
    c.base_spacing = j.at("base_spacing").get<double>();
    c.spacing_model.components.clear();
    for (const json& g : j.at("spacing_model"))
        c.spacing_model.components.push_back(
            {g.at("weight").get<double>(), g.at("mean").get<double>(), g.at("variance").get<double>()});
    c.missing_prob = j.at("missing_prob").get<double>();
    c.noise_sigma = j.at("noise_sigma").get<double>();
    c.tilt_deg = j.at("tilt_deg").get<double>();
    c.background = j.at("background").get<double>();
    c.post_intensity = j.at("post_intensity").get<double>();
    c.floor_intensity = j.at("floor_intensity").get<double>();
    c.rail = j.at("rail").get<bool>();
    c.wall_clutter = j.at("wall_clutter").get<int>();
    c.floor_clutter = j.at("floor_clutter").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

DatasetManifest make_dataset(const SynthConfig& cfg, int n_train, int n_test, const std::filesystem::path& out_dir)
{
    if (n_train < 0 || n_test < 0) throw std::invalid_argument("dataset split sizes must be non-negative");
    cfg.validate();
    std::filesystem::create_directories(out_dir / "images");
    DatasetManifest manifest;
    std::string annotations;
    std::string floors;
    for (int i = 0; i < n_train + n_test; ++i) {
        SynthConfig scene_cfg = cfg;
        scene_cfg.seed = cfg.seed + static_cast<std::uint64_t>(i);
        const SynthScene scene = render_facade(scene_cfg);
        const std::string name = fmt::format("scene_{:04d}.png", i);
        save_png(scene.image, out_dir / "images" / name);
        annotations += json{{"image", name},
                            {"boxes", boxes_to_json(scene.post_annotations)},
                            {"removed", boxes_to_json(scene.removed_posts)},
                            {"distractors", boxes_to_json(scene.distractors)}}
                           .dump() +
                       "\n";
        floors += json{{"image", name}, {"floors", floors_to_json(scene.true_floor_lines)}}.dump() + "\n";
        (i < n_train ? manifest.train : manifest.test).push_back(name);
    }
    write_file_atomic(out_dir / "annotations.jsonl", annotations);
    write_file_atomic(out_dir / "floors.jsonl", floors);
    const json m{{"format_version", kDatasetFormatVersion},
                 {"synth", synth_config_to_json(cfg)},
                 {"train", manifest.train},
                 {"test", manifest.test}};
    write_file_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
    return manifest;
}

Dataset load_dataset(const std::filesystem::path& dir)
{
    const std::filesystem::path manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        throw std::runtime_error("dataset manifest not found: '" + manifest_path.string() + "'");
    Dataset ds;
    ds.root = dir;
    try {
        const json m = json::parse(read_file(manifest_path));
        const int version = m.at("format_version").get<int>();
        if (version != kDatasetFormatVersion)
            throw std::runtime_error("unsupported dataset format_version " + std::to_string(version));

        std::map<std::string, DatasetEntry> entries;
        for (const std::string& line : split_lines(read_file(dir / "annotations.jsonl"))) {
            const json r = json::parse(line);
            DatasetEntry e;
            e.image = r.at("image").get<std::string>();
            for (const json& b : r.at("boxes")) e.posts.push_back(box_from_json(b));
            entries[e.image] = std::move(e);
        }
        if (std::filesystem::exists(dir / "floors.jsonl")) {
            for (const std::string& line : split_lines(read_file(dir / "floors.jsonl"))) {
                const json r = json::parse(line);
                auto it = entries.find(r.at("image").get<std::string>());
                if (it == entries.end()) continue;
                for (const json& f : r.at("floors"))
                    it->second.floors.push_back(
                        FloorLine{f.at("slope").get<double>(), f.at("intercept").get<double>(), 0.0, 0});
            }
        }
        auto take = [&](const char* key, std::vector<DatasetEntry>& out) {
            for (const json& n : m.at(key)) {
                const std::string name = n.get<std::string>();
                auto it = entries.find(name);
                if (it == entries.end()) throw std::runtime_error("no annotation record for '" + name + "'");
                out.push_back(it->second);
            }
        };
        take("train", ds.train);
        take("test", ds.test);
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed dataset in '" + dir.string() + "': " + e.what());
    }
    return ds;
}

}  // namespace guardscan
