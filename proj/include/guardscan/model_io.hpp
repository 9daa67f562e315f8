#pragma once

#include "guardscan/cascade.hpp"
#include "guardscan/spacing.hpp"
#include "guardscan/svm.hpp"

#include <json.hpp>

#include <filesystem>
#include <variant>

namespace guardscan {

inline constexpr int kModelFormatVersion = 1;

using WindowClassifier = std::variant<LinearSvmModel, CascadeModel>;

nlohmann::json hog_params_to_json(const HogParams& p);
HogParams hog_params_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const LinearSvmModel& m);
nlohmann::json model_to_json(const CascadeModel& m);
nlohmann::json model_to_json(const WindowClassifier& m);

/// Parses a versioned model document; dispatches on "kind". Cascades are validated.
WindowClassifier model_from_json(const nlohmann::json& j);

void save_model(const WindowClassifier& m, const std::filesystem::path& path);
WindowClassifier load_model(const std::filesystem::path& path);

nlohmann::json spacing_model_to_json(const SpacingModel& m);
SpacingModel spacing_model_from_json(const nlohmann::json& j);
void save_spacing_model(const SpacingModel& m, const std::filesystem::path& path);
SpacingModel load_spacing_model(const std::filesystem::path& path);

}  // namespace guardscan
