#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bmp/ablation.hpp"
#include "bmp/encoding.hpp"
#include "bmp/losses.hpp"
#include "bmp/scene.hpp"
#include "bmp/toy_regressor.hpp"

namespace bmp {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Every document carries a top-level "version"; readers throw FormatError on
// a missing or different version and on malformed content.
Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

Json detections_to_json(const std::vector<Detection>& detections);
std::vector<Detection> detections_from_json(const Json& j);

Json history_to_json(const std::vector<LossBreakdown>& history);
Json breakdown_to_json(const LossBreakdown& breakdown);

Json regressor_to_json(const ToyRegressor& reg);
ToyRegressor regressor_from_json(const Json& j);

Json ablation_to_json(const AblationReport& report);

// Stable text form: two-space indent and a trailing newline.
std::string dump_json(const Json& j);
Json parse_json(const std::string& text);

}  // namespace bmp
