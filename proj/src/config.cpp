#include "lidarfuse/config.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include "lidarfuse/errors.hpp"
#include "lidarfuse/pcd.hpp"

namespace lidarfuse {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(prefix, prefix + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) {
      const std::string full = prefix.empty() ? key : prefix + "." + key;
      throw ConfigError(full, "unknown config key '" + full + "'");
    }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& full) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(full, full + " has the wrong type");
  }
}

double get_number(const json& obj, const std::string& key, const std::string& full) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(full, full + " must be a number");
  return v.get<double>();
}

std::uint32_t get_count(const json& obj, const std::string& key, const std::string& full) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 0xFFFFFFFFLL)
    throw ConfigError(full, full + " must be a non-negative integer");
  return static_cast<std::uint32_t>(v.get<long long>());
}

void read_bounds(const json& obj, const std::string& key, const std::string& full, double& lo, double& hi) {
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(full, full + " must be [lo, hi]");
  lo = v[0].get<double>();
  hi = v[1].get<double>();
}

void read_ground_region(const json& obj, const std::string& full, GroundRegion& region) {
  reject_unknown(obj, full, {"x_min", "x_max", "y_max"});
  if (obj.contains("x_min")) region.x_min = get_number(obj, "x_min", full + ".x_min");
  if (obj.contains("x_max")) region.x_max = get_number(obj, "x_max", full + ".x_max");
  if (obj.contains("y_max")) region.y_max = get_number(obj, "y_max", full + ".y_max");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

GroundRegion ground_region_of(const DetectionRegion& r) {
  return GroundRegion{r.x_min, r.x_max, std::max(std::abs(r.y_min), std::abs(r.y_max))};
}

}  // namespace

SensorModel sensor_preset(std::string_view name) {
  if (name == "os1-128") return SensorModel::evenly_spaced(128, -22.5, 22.5, 2048);
  if (name == "hdl-64") return SensorModel::evenly_spaced(64, -24.8, 2.0, 2083);
  throw ConfigError("sensor", "unknown sensor preset '" + std::string(name) + "'");
}

PipelineConfig preset_config(std::string_view name) {
  PipelineConfig c;
  c.preset = std::string(name);
  if (name == "orchard") {
    c.region = DetectionRegion{0.0, 12.0, -4.625, 4.625, -1.0, 5.0};
    c.sensor_name = "os1-128";
    c.object_threshold = 0.04;
    c.objects_min = 1;
    c.objects_max = 1;
    c.label_rows = 100;
    c.label_cols = 100;
  } else if (name == "urban") {
    c.region = DetectionRegion{0.0, 19.0, -9.0, 9.0, -2.5, 4.0};
    c.sensor_name = "hdl-64";
    c.object_threshold = 0.08;
    c.objects_min = 1;
    c.objects_max = 10;
    c.label_rows = 200;
    c.label_cols = 200;
  } else {
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
  }
  c.background_threshold = 0.03;
  c.beam_threshold = 0.04;
  c.epsilon = 0.02;
  c.sensor = sensor_preset(c.sensor_name);
  c.object_leveling.region = ground_region_of(c.region);
  c.background_leveling.region = ground_region_of(c.region);
  c.mirror = true;
  return c;
}

void PipelineConfig::validate() const {
  if (background_manifest.empty()) throw ConfigError("background_manifest", "background_manifest is required");
  if (object_manifest.empty()) throw ConfigError("object_manifest", "object_manifest is required");
  if (output_dir.empty()) throw ConfigError("output_dir", "output_dir is required");
  if (scene_count < 1) throw ConfigError("scene_count", "scene_count must be at least 1");
  if (objects_min > objects_max)
    throw ConfigError("objects_per_scene", "objects_per_scene.max must be >= objects_per_scene.min");
  try {
    region.validate();
  } catch (const GeometryError& e) {
    throw ConfigError("region", e.what());
  }
  if (!(object_threshold > 0.0)) throw ConfigError("thresholds.F_o", "F_o must be positive");
  if (!(background_threshold > 0.0)) throw ConfigError("thresholds.F_b", "F_b must be positive");
  if (!(beam_threshold > 0.0)) throw ConfigError("thresholds.L", "L must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("thresholds.epsilon", "epsilon must be positive");
  for (const auto* lp : {&object_leveling, &background_leveling}) {
    const std::string which = lp == &object_leveling ? "leveling.object_region" : "leveling.background_region";
    if (!(lp->region.x_min < lp->region.x_max)) throw ConfigError(which, which + " requires x_min < x_max");
    if (!(lp->region.y_max > 0.0)) throw ConfigError(which, which + ".y_max must be positive");
    if (lp->grid_size < 1) throw ConfigError("leveling.grid_size", "leveling.grid_size must be positive");
    if (!(lp->z_percentile >= 0.0 && lp->z_percentile <= 1.0))
      throw ConfigError("leveling.z_percentile", "leveling.z_percentile must be in [0, 1]");
  }
  try {
    sensor.validate();
  } catch (const GeometryError& e) {
    throw ConfigError("sensor", e.what());
  }
  if (label_rows < 1 || label_cols < 1) throw ConfigError("label_grid", "label_grid dimensions must be positive");
  if (max_placement_attempts < 1)
    throw ConfigError("max_placement_attempts", "max_placement_attempts must be at least 1");
}

PipelineConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc, "", {"preset", "background_manifest", "object_manifest", "output_dir", "scene_count",
                           "objects_per_scene", "region", "sensor", "thresholds", "leveling", "mirror", "seed",
                           "workers", "strict", "label_grid", "verify", "max_placement_attempts",
                           "min_visible_points"});
  PipelineConfig c = preset_config(doc.contains("preset") ? get<std::string>(doc, "preset", "preset") : "orchard");
  if (!doc.contains("preset")) c.preset.clear();

  if (doc.contains("background_manifest"))
    c.background_manifest = resolve(base_dir, get<std::string>(doc, "background_manifest", "background_manifest"));
  if (doc.contains("object_manifest"))
    c.object_manifest = resolve(base_dir, get<std::string>(doc, "object_manifest", "object_manifest"));
  if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, get<std::string>(doc, "output_dir", "output_dir"));
  if (doc.contains("scene_count")) c.scene_count = get_count(doc, "scene_count", "scene_count");
  if (doc.contains("objects_per_scene")) {
    const json& o = doc.at("objects_per_scene");
    reject_unknown(o, "objects_per_scene", {"min", "max"});
    if (o.contains("min")) c.objects_min = get_count(o, "min", "objects_per_scene.min");
    if (o.contains("max")) c.objects_max = get_count(o, "max", "objects_per_scene.max");
  }
  bool region_given = false;
  if (doc.contains("region")) {
    const json& r = doc.at("region");
    reject_unknown(r, "region", {"x", "y", "z"});
    if (r.contains("x")) read_bounds(r, "x", "region.x", c.region.x_min, c.region.x_max);
    if (r.contains("y")) read_bounds(r, "y", "region.y", c.region.y_min, c.region.y_max);
    if (r.contains("z")) read_bounds(r, "z", "region.z", c.region.z_min, c.region.z_max);
    region_given = true;
  }
  if (region_given) {
    c.object_leveling.region = ground_region_of(c.region);
    c.background_leveling.region = ground_region_of(c.region);
  }
  if (doc.contains("sensor")) {
    c.sensor_name = get<std::string>(doc, "sensor", "sensor");
    c.sensor = sensor_preset(c.sensor_name);
  }
  if (doc.contains("thresholds")) {
    const json& t = doc.at("thresholds");
    reject_unknown(t, "thresholds", {"F_o", "F_b", "L", "epsilon"});
    if (t.contains("F_o")) c.object_threshold = get_number(t, "F_o", "thresholds.F_o");
    if (t.contains("F_b")) c.background_threshold = get_number(t, "F_b", "thresholds.F_b");
    if (t.contains("L")) c.beam_threshold = get_number(t, "L", "thresholds.L");
    if (t.contains("epsilon")) c.epsilon = get_number(t, "epsilon", "thresholds.epsilon");
  }
  if (doc.contains("leveling")) {
    const json& l = doc.at("leveling");
    reject_unknown(l, "leveling", {"grid_size", "z_percentile", "object_region", "background_region"});
    if (l.contains("grid_size")) {
      const auto g = get_count(l, "grid_size", "leveling.grid_size");
      c.object_leveling.grid_size = c.background_leveling.grid_size = g;
    }
    if (l.contains("z_percentile")) {
      const double q = get_number(l, "z_percentile", "leveling.z_percentile");
      c.object_leveling.z_percentile = c.background_leveling.z_percentile = q;
    }
    if (l.contains("object_region"))
      read_ground_region(l.at("object_region"), "leveling.object_region", c.object_leveling.region);
    if (l.contains("background_region"))
      read_ground_region(l.at("background_region"), "leveling.background_region", c.background_leveling.region);
  }
  if (doc.contains("mirror")) c.mirror = get<bool>(doc, "mirror", "mirror");
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("seed", "seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("workers")) c.workers = get_count(doc, "workers", "workers");
  if (doc.contains("strict")) c.strict = get<bool>(doc, "strict", "strict");
  if (doc.contains("verify")) c.verify = get<bool>(doc, "verify", "verify");
  if (doc.contains("label_grid")) {
    const json& g = doc.at("label_grid");
    reject_unknown(g, "label_grid", {"rows", "cols"});
    if (g.contains("rows")) c.label_rows = get_count(g, "rows", "label_grid.rows");
    if (g.contains("cols")) c.label_cols = get_count(g, "cols", "label_grid.cols");
  }
  if (doc.contains("max_placement_attempts"))
    c.max_placement_attempts = get_count(doc, "max_placement_attempts", "max_placement_attempts");
  if (doc.contains("min_visible_points"))
    c.min_visible_points = get_count(doc, "min_visible_points", "min_visible_points");

  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') c.output_dir = env;
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const PipelineConfig& c) {
  json doc;
  if (!c.preset.empty()) doc["preset"] = c.preset;
  doc["background_manifest"] = c.background_manifest.string();
  doc["object_manifest"] = c.object_manifest.string();
  doc["output_dir"] = c.output_dir.string();
  doc["scene_count"] = c.scene_count;
  doc["objects_per_scene"] = {{"min", c.objects_min}, {"max", c.objects_max}};
  doc["region"] = {{"x", {c.region.x_min, c.region.x_max}},
                   {"y", {c.region.y_min, c.region.y_max}},
                   {"z", {c.region.z_min, c.region.z_max}}};
  doc["sensor"] = c.sensor_name;
  doc["thresholds"] = {
      {"F_o", c.object_threshold}, {"F_b", c.background_threshold}, {"L", c.beam_threshold}, {"epsilon", c.epsilon}};
  const auto region_json = [](const GroundRegion& r) {
    return json{{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_max", r.y_max}};
  };
  doc["leveling"] = {{"grid_size", c.background_leveling.grid_size},
                     {"z_percentile", c.background_leveling.z_percentile},
                     {"object_region", region_json(c.object_leveling.region)},
                     {"background_region", region_json(c.background_leveling.region)}};
  doc["mirror"] = c.mirror;
  doc["seed"] = c.seed;
  doc["workers"] = c.workers;
  doc["strict"] = c.strict;
  doc["verify"] = c.verify;
  doc["label_grid"] = {{"rows", c.label_rows}, {"cols", c.label_cols}};
  doc["max_placement_attempts"] = c.max_placement_attempts;
  doc["min_visible_points"] = c.min_visible_points;
  return doc;
}

}  // namespace lidarfuse
