#include "lidarfuse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <cstdio>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "lidarfuse/assembly.hpp"
#include "lidarfuse/errors.hpp"
#include "lidarfuse/pcd.hpp"
#include "lidarfuse/sampling.hpp"
#include "lidarfuse/scene_record.hpp"
#include "lidarfuse/store.hpp"

namespace lidarfuse {

void StageTiming::add(double seconds) {
  const double ms = seconds * 1e3;
  std::size_t b = 0;
  while (b < kBucketMs.size() && ms >= kBucketMs[b]) ++b;
  ++buckets[b];
  total_seconds += seconds;
  ++samples;
}

void StageTiming::merge(const StageTiming& other) {
  for (std::size_t b = 0; b < buckets.size(); ++b) buckets[b] += other.buckets[b];
  total_seconds += other.total_seconds;
  samples += other.samples;
}

std::string record_name(std::uint32_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%08u.p2ps", index);
  return buf;
}

std::string RunReport::summary() const {
  std::ostringstream out;
  out << "requested " << requested << "\n"
      << "written " << written << "\n"
      << "failed " << failed.size() << "\n"
      << "objects " << objects_inserted << "\n"
      << "verified " << verified << "\n"
      << "aborted " << (aborted ? "yes" : "no") << "\n";
  for (const auto& f : failed) out << "failure " << record_name(f.index) << " " << f.stage << ": " << f.reason << "\n";
  for (const auto& w : warnings) out << "warning " << w << "\n";
  return out.str();
}

std::string RunReport::timing() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "wall %.3f s, %.1f scenes/s, %u workers\n", wall_seconds, scenes_per_second,
                workers);
  out << line;
  out << "stage      total_s   <1ms  <2ms  <5ms <10ms <20ms <50ms <100ms >=100ms\n";
  for (std::size_t s = 0; s < stages.size(); ++s) {
    std::snprintf(line, sizeof line, "%-8s %9.3f", kPipelineStages[s], stages[s].total_seconds);
    out << line;
    for (auto n : stages[s].buckets) {
      std::snprintf(line, sizeof line, " %5llu", static_cast<unsigned long long>(n));
      out << line;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint32_t resolve_workers(std::uint32_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on `workers` threads. Stops handing out
/// indices once `stop` is set. Exceptions escaping fn terminate the worker
/// loop and are rethrown on the calling thread.
template <class Fn>
void parallel_for(std::uint32_t n, std::uint32_t workers, const std::atomic<bool>& stop, Fn&& fn) {
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto loop = [&](std::uint32_t worker) {
    try {
      for (;;) {
        if (stop.load()) return;
        const std::uint32_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i, worker);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  workers = std::max(1u, std::min(workers, n));
  std::vector<std::thread> threads;
  for (std::uint32_t w = 1; w < workers; ++w) threads.emplace_back(loop, w);
  loop(0);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

struct SceneFailure {
  std::string stage;
  std::string reason;
};

std::string strip_stage(const std::string& what, const std::string& stage) {
  const std::string prefix = stage + ": ";
  return what.starts_with(prefix) ? what.substr(prefix.size()) : what;
}

SceneFailure failure_of(const std::exception& e, const std::string& fallback_stage) {
  if (const auto* c = dynamic_cast<const CompositionError*>(&e)) {
    const std::string stage = stage_name(c->stage());
    return {stage, strip_stage(c->what(), stage)};
  }
  return {fallback_stage, e.what()};
}

/// Computes each slot at most once, on first use, caching the result or
/// the failure. Concurrent callers for the same slot wait for the first.
template <class T>
class LazyPool {
 public:
  using Factory = std::function<T(std::size_t)>;
  LazyPool(std::size_t n, Factory factory, std::string stage)
      : slots_(n), factory_(std::move(factory)), stage_(std::move(stage)) {
    for (auto& s : slots_) s = std::make_unique<Slot>();
  }
  std::size_t size() const noexcept { return slots_.size(); }

  const T& get(std::size_t i) {
    Slot& s = *slots_.at(i);
    std::lock_guard lock(s.mutex);
    if (!s.done) {
      try {
        s.value.emplace(factory_(i));
      } catch (const std::exception& e) {
        s.failure = failure_of(e, stage_);
      }
      s.done = true;
    }
    if (s.failure) throw Failed{*s.failure};
    return *s.value;
  }

  struct Failed {
    SceneFailure failure;
  };

 private:
  struct Slot {
    std::mutex mutex;
    bool done = false;
    std::optional<T> value;
    std::optional<SceneFailure> failure;
  };
  std::vector<std::unique_ptr<Slot>> slots_;
  Factory factory_;
  std::string stage_;
};

struct SceneOutcome {
  bool written = false;
  std::optional<SceneFailure> failure;
  std::vector<std::string> warnings;
  std::uint32_t objects = 0;
};

/// Final box center predicted without rendering; mirrors render_insertion's check.
bool placement_in_region(const PreparedObject& object, const PlacementTarget& target,
                         const PreparedBackground& background, const DetectionRegion& region) {
  const Point3 c = quantize(background.transform.invert(place_box(object.box, target).center));
  return region.contains(c) && c.x() < region.x_max && c.y() < region.y_max;
}

void remove_stale_records(const std::filesystem::path& records) {
  namespace fs = std::filesystem;
  if (!fs::exists(records)) return;
  for (const auto& entry : fs::directory_iterator(records))
    if (entry.is_regular_file() && entry.path().extension() == ".p2ps") fs::remove(entry.path());
}

}  // namespace

RunReport generate_dataset(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  config.validate();
  const auto t_start = Clock::now();

  RunReport report;
  report.requested = config.scene_count;
  report.workers = resolve_workers(config.workers);

  const std::vector<ManifestEntry> bg_entries = read_manifest(config.background_manifest);
  const std::vector<ObjectEntry> obj_entries = read_object_manifest(config.object_manifest);
  if (bg_entries.empty()) throw ConfigError("background_manifest", "background manifest is empty");
  if (obj_entries.empty() && config.objects_max > 0) throw ConfigError("object_manifest", "object manifest is empty");

  CompositionParams params;
  params.beams = std::make_shared<const BeamGrid>(beam_directions(config.sensor));
  params.sensor_preset = config.sensor_name;
  params.region = config.region;
  params.object_leveling = config.object_leveling;
  params.background_leveling = config.background_leveling;
  params.object_threshold = config.object_threshold;
  params.background_threshold = config.background_threshold;
  params.beam_threshold = config.beam_threshold;
  params.epsilon = config.epsilon;
  params.min_visible_points = config.min_visible_points;
  params.max_objects = std::max(config.objects_max, 1u);
  params.strict = config.strict;

  // Pools list originals first, then their mirrors.
  const std::size_t mirrors = config.mirror ? 2 : 1;
  LazyPool<PreparedBackground> backgrounds(
      bg_entries.size() * mirrors,
      [&](std::size_t i) {
        const ManifestEntry& e = bg_entries[i % bg_entries.size()];
        const bool mirrored = i >= bg_entries.size();
        PointCloud cloud = read_pcd(e.path);
        std::string id = e.id;
        if (mirrored) {
          cloud = mirror_x(cloud);
          id += kMirrorSuffix;
        }
        return PreparedBackground::prepare(std::move(id), std::move(cloud), params.background_leveling);
      },
      "load-background");
  LazyPool<PreparedObject> objects(
      obj_entries.size() * mirrors,
      [&](std::size_t i) {
        const ObjectEntry& e = obj_entries[i % obj_entries.size()];
        const bool mirrored = i >= obj_entries.size();
        PointCloud cloud = read_pcd(e.path);
        BoundingBox box = e.box;
        std::string id = e.id;
        if (mirrored) {
          cloud = mirror_x(cloud);
          box = mirror_x(box);
          id += kMirrorSuffix;
        }
        return PreparedObject::prepare(std::move(id), cloud, box, params.object_leveling);
      },
      "load-object");

  const fs::path records = config.output_dir / "records";
  fs::create_directories(records);
  remove_stale_records(records);

  std::vector<SceneOutcome> outcomes(config.scene_count);
  std::vector<std::array<StageTiming, kPipelineStages.size()>> timings(report.workers);
  std::atomic<bool> abort{false};

  const auto run_scene = [&](std::uint32_t k, std::uint32_t worker) {
    auto& timing = timings[worker];
    SceneOutcome& out = outcomes[k];
    const std::uint64_t seed = scene_seed(config.seed, k);
    SceneRng rng(seed);
    try {
      auto t0 = Clock::now();
      const std::size_t b = rng.below(backgrounds.size());
      const std::uint32_t count = config.objects_max == 0 ? 0 : rng.between(config.objects_min, config.objects_max);
      std::vector<std::size_t> picks(count);
      for (auto& o : picks) o = rng.below(objects.size());

      const PreparedBackground& bg = backgrounds.get(b);
      std::vector<const PreparedObject*> chosen;
      for (std::size_t o : picks) chosen.push_back(&objects.get(o));
      timing[0].add(seconds_since(t0));

      t0 = Clock::now();
      std::vector<const PreparedObject*> placed;
      std::vector<PlacementTarget> targets;
      std::vector<BoundingBox> placed_boxes;
      for (const PreparedObject* obj : chosen) {
        std::optional<PlacementTarget> found;
        for (std::uint32_t attempt = 0; attempt < config.max_placement_attempts && !found; ++attempt) {
          std::optional<PlacementTarget> drawn;
          try {
            drawn = sample_placement(rng, config.region, obj->box);
          } catch (const GeometryError& e) {
            throw CompositionError(Stage::kPlacement, std::string(obj->id) + ": " + e.what());
          }
          const PlacementTarget target = *drawn;
          if (!placement_in_region(*obj, target, bg, config.region)) continue;
          const BoundingBox box = place_box(obj->box, target);
          if (std::any_of(placed_boxes.begin(), placed_boxes.end(),
                          [&](const BoundingBox& other) { return footprints_overlap(other, box); }))
            continue;
          found = target;
          placed_boxes.push_back(box);
        }
        if (!found) {
          const std::string reason = "no admissible placement for " + obj->id + " after " +
                                     std::to_string(config.max_placement_attempts) + " attempts";
          if (config.strict) throw CompositionError(Stage::kPlacement, reason);
          out.warnings.push_back(reason);
          continue;
        }
        placed.push_back(obj);
        targets.push_back(*found);
      }
      timing[1].add(seconds_since(t0));

      t0 = Clock::now();
      MultiComposition composed = compose_multi(bg, placed, targets, params, seed);
      for (const auto& s : composed.skipped) out.warnings.push_back("skipped " + s.object_id + ": " + s.reason);
      if (count > 0 && composed.scene.boxes.empty()) {
        const std::string reason = "no object could be inserted";
        throw CompositionError(Stage::kPlacement, composed.skipped.empty() ? reason
                                                                            : reason + " (" + composed.skipped.back().reason + ")");
      }
      timing[2].add(seconds_since(t0));

      t0 = Clock::now();
      try {
        write_scene(composed.scene, records / record_name(k));
      } catch (const std::exception& e) {
        throw CompositionError(Stage::kStore, e.what());
      }
      timing[3].add(seconds_since(t0));
      out.objects = static_cast<std::uint32_t>(composed.scene.boxes.size());
      out.written = true;
    } catch (const LazyPool<PreparedBackground>::Failed& f) {
      out.failure = f.failure;
    } catch (const LazyPool<PreparedObject>::Failed& f) {
      out.failure = f.failure;
    } catch (const std::exception& e) {
      out.failure = failure_of(e, "compose");
    }
    if (out.failure && config.strict) abort = true;
  };

  parallel_for(config.scene_count, report.workers, abort, run_scene);
  const std::atomic<bool> never{false};

  if (config.verify) {
    const BackgroundStore store = BackgroundStore::from_manifest(config.background_manifest);
    parallel_for(config.scene_count, report.workers, never, [&](std::uint32_t k, std::uint32_t worker) {
      SceneOutcome& out = outcomes[k];
      if (!out.written) return;
      const auto t0 = Clock::now();
      const fs::path path = records / record_name(k);
      try {
        const ComposedScene scene = read_scene(path);
        const auto [cloud, labels] = reconstruct(scene, store, config.label_rows, config.label_cols);
        const std::size_t expected =
            scene.background_point_count - scene.background_dropped.size() + scene.object_points.size();
        if (cloud.size() != expected) throw FormatError("reconstructed point count mismatch");
        if (labels.count() == 0 && !scene.boxes.empty()) throw FormatError("label grid is empty");
      } catch (const std::exception& e) {
        out.written = false;
        out.failure = SceneFailure{"verify", e.what()};
        std::error_code ignored;
        fs::remove(path, ignored);
      }
      timings[worker][4].add(seconds_since(t0));
    });
  }

  std::string manifest;
  for (std::uint32_t k = 0; k < config.scene_count; ++k) {
    SceneOutcome& out = outcomes[k];
    if (out.written) {
      ++report.written;
      report.objects_inserted += out.objects;
      if (config.verify) ++report.verified;
      const std::string name = record_name(k);
      manifest += name.substr(0, 8) + "\trecords/" + name + "\n";
    } else if (out.failure) {
      report.failed.push_back(FailedScene{k, out.failure->stage, out.failure->reason});
    } else {
      report.failed.push_back(FailedScene{k, "aborted", "strict mode stopped the run"});
    }
    for (const auto& w : out.warnings) report.warnings.push_back(record_name(k).substr(0, 8) + ": " + w);
  }
  report.aborted = abort.load();
  io::write_file_atomic(config.output_dir / "manifest.txt", manifest);
  io::write_file_atomic(config.output_dir / "report.txt", report.summary());

  for (const auto& t : timings)
    for (std::size_t s = 0; s < t.size(); ++s) report.stages[s].merge(t[s]);
  report.wall_seconds = seconds_since(t_start);
  report.scenes_per_second = report.wall_seconds > 0.0 ? report.written / report.wall_seconds : 0.0;
  return report;
}

ValidationReport validate_dataset(const std::filesystem::path& dataset_dir,
                                  const std::filesystem::path& background_manifest, std::uint32_t label_rows,
                                  std::uint32_t label_cols, std::uint32_t workers) {
  const std::vector<ManifestEntry> entries = read_manifest(dataset_dir / "manifest.txt");
  const BackgroundStore store = BackgroundStore::from_manifest(background_manifest);
  std::vector<std::optional<std::string>> errors(entries.size());
  const std::atomic<bool> never{false};
  parallel_for(static_cast<std::uint32_t>(entries.size()), resolve_workers(workers), never,
               [&](std::uint32_t i, std::uint32_t) {
                 try {
                   const ComposedScene scene = read_scene(entries[i].path);
                   reconstruct(scene, store, label_rows, label_cols);
                 } catch (const std::exception& e) {
                   errors[i] = e.what();
                 }
               });
  ValidationReport report;
  report.checked = static_cast<std::uint32_t>(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (errors[i]) report.failed.push_back(FailedScene{static_cast<std::uint32_t>(i), "verify", *errors[i]});
  return report;
}

}  // namespace lidarfuse
