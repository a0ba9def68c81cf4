// Command-line front end: batch generation, reconstruction, validation,
// fixtures and record inspection.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lidarfuse/config.hpp"
#include "lidarfuse/errors.hpp"
#include "lidarfuse/fixtures.hpp"
#include "lidarfuse/pcd.hpp"
#include "lidarfuse/pipeline.hpp"
#include "lidarfuse/scene_record.hpp"
#include "lidarfuse/store.hpp"

namespace fs = std::filesystem;
using namespace lidarfuse;

namespace {

struct GenerateOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> workers;
  std::optional<std::uint32_t> scenes;
  std::string output;
  std::string backgrounds;
  std::string objects;
  bool strict = false;
  bool no_verify = false;
  std::string timing;
};

int run_generate(const GenerateOptions& o) {
  nlohmann::json doc = nlohmann::json::object();
  fs::path base = fs::current_path();
  if (!o.config.empty()) {
    doc = nlohmann::json::parse(io::read_file(o.config));
    base = fs::absolute(o.config).parent_path();
  }
  const auto abs = [](const std::string& p) { return fs::absolute(p).string(); };
  if (!o.preset.empty()) doc["preset"] = o.preset;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.workers) doc["workers"] = *o.workers;
  if (o.scenes) doc["scene_count"] = *o.scenes;
  if (!o.output.empty()) doc["output_dir"] = abs(o.output);
  if (!o.backgrounds.empty()) doc["background_manifest"] = abs(o.backgrounds);
  if (!o.objects.empty()) doc["object_manifest"] = abs(o.objects);
  if (o.strict) doc["strict"] = true;
  if (o.no_verify) doc["verify"] = false;

  const PipelineConfig config = parse_config(doc, base);
  const RunReport report = generate_dataset(config);
  std::cout << report.summary() << report.timing();
  if (!o.timing.empty()) io::write_file_atomic(o.timing, report.timing());
  return report.failed.empty() || !config.strict ? 0 : 1;
}

int run_reconstruct(const std::string& record, const std::string& backgrounds, const std::string& out,
                    const std::string& labels, std::uint32_t rows, std::uint32_t cols) {
  const ComposedScene scene = read_scene(record);
  const BackgroundStore store = BackgroundStore::from_manifest(backgrounds);
  const auto [cloud, grid] = reconstruct(scene, store, rows, cols);
  write_pcd(cloud, out);
  if (!labels.empty()) {
    std::string text;
    for (std::uint32_t r = 0; r < grid.rows; ++r) {
      for (std::uint32_t c = 0; c < grid.cols; ++c) text += grid.at(r, c) ? '1' : '0';
      text += '\n';
    }
    io::write_file_atomic(labels, text);
  }
  std::cout << cloud.size() << " points, " << grid.count() << " labeled cells\n";
  return 0;
}

int run_validate(const std::string& dataset, const std::string& backgrounds, std::uint32_t rows, std::uint32_t cols,
                 std::uint32_t workers) {
  const ValidationReport report = validate_dataset(dataset, backgrounds, rows, cols, workers);
  for (const auto& f : report.failed) std::cout << "invalid entry " << f.index << ": " << f.reason << "\n";
  std::cout << report.checked << " records checked, " << report.failed.size() << " invalid\n";
  return report.failed.empty() ? 0 : 1;
}

int run_inspect(const std::string& record) {
  const ComposedScene s = read_scene(record);
  const auto& r = s.region;
  std::printf("background      %s\n", s.background_id.c_str());
  std::printf("sensor          %s\n", s.sensor_preset.c_str());
  std::printf("seed            %llu\n", static_cast<unsigned long long>(s.seed));
  std::printf("region          x [%g, %g] y [%g, %g] z [%g, %g]\n", r.x_min, r.x_max, r.y_min, r.y_max, r.z_min,
              r.z_max);
  std::printf("background pts  %u (%zu dropped)\n", s.background_point_count, s.background_dropped.size());
  std::printf("object pts      %zu\n", s.object_points.size());
  for (std::size_t k = 0; k < s.boxes.size(); ++k) {
    const auto& b = s.boxes[k];
    std::printf("box %-3zu         center (%.3f, %.3f, %.3f) extent (%.3f, %.3f, %.3f) yaw %.4f", k, b.center.x(),
                b.center.y(), b.center.z(), b.extent.x(), b.extent.y(), b.extent.z(), b.yaw());
    if (k < s.objects.size())
      std::printf("  %s -> (%.3f, %.3f)", s.objects[k].object_id.c_str(), s.objects[k].target.x(),
                  s.objects[k].target.y());
    std::printf("\n");
  }
  return 0;
}

int run_fixture_shape(const std::string& kind, const std::string& sensor, const std::string& out, double distance,
                      double radius, double height) {
  fixtures::Shape shape;
  if (kind == "plane") {
    shape = fixtures::Plane{Point3(0.0, 0.0, 1.0), -height};
  } else if (kind == "cone") {
    shape = fixtures::facing_cone(distance, radius, height);
  } else if (kind == "wall") {
    shape = fixtures::Wall{Point3(distance, 0.0, 0.0), 0.0, 2.0 * radius, height};
  } else {
    shape = fixtures::Sphere{Point3(distance, 0.0, 0.0), radius};
  }
  const fixtures::Fixture f = fixtures::make_fixture(shape, sensor_preset(sensor));
  if (!f.warning.empty()) std::cerr << "warning: " << f.warning << "\n";
  write_pcd(f.cloud, out);
  std::cout << f.cloud.size() << " points";
  if (f.box) {
    std::printf("; box center (%g, %g, %g) extent (%g, %g, %g) yaw %g", f.box->center.x(), f.box->center.y(),
                f.box->center.z(), f.box->extent.x(), f.box->extent.y(), f.box->extent.z(), f.box->yaw());
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lidarfuse: synthetic lidar scenes from background and object captures"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate a dataset");
  generate->add_option("-c,--config", gen.config, "JSON config file")->check(CLI::ExistingFile);
  generate->add_option("--preset", gen.preset, "Base parameter set")->check(CLI::IsMember({"orchard", "urban"}));
  generate->add_option("--seed", gen.seed, "Master seed");
  generate->add_option("--workers", gen.workers, "Worker threads (0 = all cores)");
  generate->add_option("--scenes", gen.scenes, "Number of scenes");
  generate->add_option("-o,--output", gen.output, "Output directory");
  generate->add_option("--background-manifest", gen.backgrounds, "Background manifest");
  generate->add_option("--object-manifest", gen.objects, "Object manifest");
  generate->add_flag("--strict", gen.strict, "Stop at the first failed scene");
  generate->add_flag("--no-verify", gen.no_verify, "Skip the post-run verification pass");
  generate->add_option("--timing", gen.timing, "Also write the timing table here");

  std::string record, backgrounds, out, labels, dataset;
  std::uint32_t rows = 100, cols = 100, workers = 0;
  auto* recon = app.add_subcommand("reconstruct", "Expand a record into a full point cloud");
  recon->add_option("record", record, "Scene record")->required()->check(CLI::ExistingFile);
  recon->add_option("--backgrounds", backgrounds, "Background manifest")->required();
  recon->add_option("-o,--out", out, "Output PCD")->required();
  recon->add_option("--labels", labels, "Write the center grid as text");
  recon->add_option("--rows", rows, "Label grid rows");
  recon->add_option("--cols", cols, "Label grid columns");

  auto* validate = app.add_subcommand("validate", "Check every record of a dataset");
  validate->add_option("dataset", dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  validate->add_option("--backgrounds", backgrounds, "Background manifest")->required();
  validate->add_option("--rows", rows, "Label grid rows");
  validate->add_option("--cols", cols, "Label grid columns");
  validate->add_option("--workers", workers, "Worker threads (0 = all cores)");

  auto* inspect = app.add_subcommand("inspect", "Print a record's contents");
  inspect->add_option("record", record, "Scene record")->required()->check(CLI::ExistingFile);

  auto* fixture = app.add_subcommand("fixture", "Procedural test data");
  fixture->require_subcommand(1);
  std::string kind = "cone", sensor = "os1-128";
  double distance = 5.0, radius = 0.5, height = 1.0;
  auto* shape = fixture->add_subcommand("shape", "Ray-cast one analytic shape");
  shape->add_option("--kind", kind, "plane, cone, wall or sphere")
      ->check(CLI::IsMember({"plane", "cone", "wall", "sphere"}));
  shape->add_option("--sensor", sensor, "Sensor preset")->check(CLI::IsMember({"os1-128", "hdl-64"}));
  shape->add_option("--distance", distance, "Distance ahead of the sensor, m");
  shape->add_option("--radius", radius, "Radius (half width for walls), m");
  shape->add_option("--height", height, "Height, or depth below the sensor for planes, m");
  shape->add_option("-o,--out", out, "Output PCD")->required();

  fixtures::StoreSpec spec;
  auto* store = fixture->add_subcommand("store", "Write synthetic background and object stores");
  store->add_option("-o,--out", out, "Store directory")->required();
  store->add_option("--sensor", sensor, "Sensor preset")->check(CLI::IsMember({"os1-128", "hdl-64"}));
  store->add_option("--backgrounds", spec.backgrounds, "Background count");
  store->add_option("--objects", spec.objects, "Object count");
  store->add_option("--seed", spec.seed, "Seed");
  store->add_option("--max-range", spec.max_range, "Maximum return range, m");
  store->add_option("--trees", spec.trees, "Trees per background");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every usage error exits 2.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*recon) return run_reconstruct(record, backgrounds, out, labels, rows, cols);
    if (*validate) return run_validate(dataset, backgrounds, rows, cols, workers);
    if (*inspect) return run_inspect(record);
    if (*shape) return run_fixture_shape(kind, sensor, out, distance, radius, height);
    if (*store) {
      spec.sensor = sensor_preset(sensor);
      const auto paths = fixtures::write_store(out, spec);
      std::cout << paths.background_manifest.string() << "\n" << paths.object_manifest.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
