#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lidarfuse/core.hpp"
#include "lidarfuse/leveling.hpp"

namespace lidarfuse {

/// Named beam layouts: "os1-128" (128 × 2048, ±22.5°) and "hdl-64"
/// (64 × 2083, −24.8° to 2°). Throws ConfigError for other names.
SensorModel sensor_preset(std::string_view name);

/// Environment variable that, when set, replaces the configured output directory.
inline constexpr const char* kOutputDirEnv = "LIDARFUSE_OUTPUT_DIR";

/// Batch generation settings. Field comments give the JSON key.
struct PipelineConfig {
  std::string preset;                        // "preset": base values, "orchard" or "urban"
  std::filesystem::path background_manifest; // "background_manifest"
  std::filesystem::path object_manifest;     // "object_manifest"
  std::filesystem::path output_dir;          // "output_dir"
  std::uint32_t scene_count = 1;             // "scene_count"
  std::uint32_t objects_min = 1;             // "objects_per_scene.min"
  std::uint32_t objects_max = 1;             // "objects_per_scene.max"
  DetectionRegion region;                    // "region.{x,y,z}": [lo, hi]
  std::string sensor_name;                   // "sensor"
  SensorModel sensor;                        // derived from "sensor"
  double object_threshold = 0.04;            // "thresholds.F_o", meters
  double background_threshold = 0.03;        // "thresholds.F_b", meters
  double beam_threshold = 0.04;              // "thresholds.L", meters
  double epsilon = 0.02;                     // "thresholds.epsilon", radians
  LevelingParams object_leveling;            // "leveling.object_region", shared grid keys
  LevelingParams background_leveling;        // "leveling.background_region"
  bool mirror = true;                        // "mirror": add x-axis mirrored copies to both pools
  std::uint64_t seed = 0;                    // "seed"
  std::uint32_t workers = 0;                 // "workers": 0 = one per hardware thread
  bool strict = false;                       // "strict"
  std::uint32_t label_rows = 100;            // "label_grid.rows"
  std::uint32_t label_cols = 100;            // "label_grid.cols"
  bool verify = true;                        // "verify": re-read and reconstruct every record
  std::uint32_t max_placement_attempts = 100;  // "max_placement_attempts"
  std::uint32_t min_visible_points = 1;      // "min_visible_points"

  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

/// Built-in parameter sets. Manifests and output directory are left empty.
PipelineConfig preset_config(std::string_view name);

/// Parses a JSON config. Relative paths resolve against `base_dir`. Unknown
/// keys are rejected. The "preset" key, if present, supplies defaults.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const PipelineConfig& config);

}  // namespace lidarfuse
