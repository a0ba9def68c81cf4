#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lidarfuse/config.hpp"

namespace lidarfuse {

struct FailedScene {
  std::uint32_t index = 0;
  std::string stage;
  std::string reason;
};

/// Wall-clock buckets for one pipeline stage. Upper bounds in milliseconds;
/// the last bucket is open-ended.
struct StageTiming {
  static constexpr std::array<double, 7> kBucketMs{1, 2, 5, 10, 20, 50, 100};
  std::array<std::uint64_t, kBucketMs.size() + 1> buckets{};
  double total_seconds = 0.0;
  std::uint64_t samples = 0;
  void add(double seconds);
  void merge(const StageTiming& other);
};

inline constexpr std::array<const char*, 5> kPipelineStages{"load", "sample", "compose", "write", "verify"};

struct RunReport {
  std::uint32_t requested = 0;
  std::uint32_t written = 0;
  std::vector<FailedScene> failed;  // ascending scene index
  std::vector<std::string> warnings;
  std::uint32_t objects_inserted = 0;
  std::uint32_t verified = 0;
  bool aborted = false;  // strict mode stopped early
  std::uint32_t workers = 0;
  double wall_seconds = 0.0;
  double scenes_per_second = 0.0;
  std::array<StageTiming, kPipelineStages.size()> stages;

  /// Deterministic summary written to report.txt (no timings).
  std::string summary() const;
  /// Throughput and stage histogram, for the terminal.
  std::string timing() const;
};

/// Record file name for a scene index: eight digits plus ".p2ps".
std::string record_name(std::uint32_t index);

/// Generates config.scene_count scenes into config.output_dir:
/// records/NNNNNNNN.p2ps, manifest.txt (id<TAB>records/…) and report.txt.
/// The tree depends only on the config, never on worker count.
RunReport generate_dataset(const PipelineConfig& config);

struct ValidationReport {
  std::uint32_t checked = 0;
  std::vector<FailedScene> failed;
};

/// Re-reads every record in a dataset's manifest, validates it and
/// reconstructs it against the background store.
ValidationReport validate_dataset(const std::filesystem::path& dataset_dir,
                                  const std::filesystem::path& background_manifest, std::uint32_t label_rows,
                                  std::uint32_t label_cols, std::uint32_t workers = 1);

}  // namespace lidarfuse
