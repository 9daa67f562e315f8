#pragma once

#include "guardscan/floors.hpp"
#include "guardscan/geometry.hpp"
#include "guardscan/synthgen.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace guardscan {

inline constexpr int kDatasetFormatVersion = 1;

struct DatasetEntry {
    std::string image;  // file name under images/
    std::vector<BoundingBox> posts;
    std::vector<FloorLine> floors;
};

struct Dataset {
    std::filesystem::path root;
    std::vector<DatasetEntry> train;
    std::vector<DatasetEntry> test;

    std::filesystem::path image_path(const DatasetEntry& e) const { return root / "images" / e.image; }
};

struct DatasetManifest {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Renders n_train + n_test scenes with seeds cfg.seed .. cfg.seed + n - 1 and writes
/// images/*.png, annotations.jsonl, floors.jsonl and manifest.json.
DatasetManifest make_dataset(const SynthConfig& cfg, int n_train, int n_test,
                             const std::filesystem::path& out_dir);

Dataset load_dataset(const std::filesystem::path& dir);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace guardscan
