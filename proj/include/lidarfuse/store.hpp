#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "lidarfuse/assembly.hpp"
#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Suffix naming the x-axis mirror of a stored cloud, e.g. "row7#mirror".
inline constexpr std::string_view kMirrorSuffix = "#mirror";

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;  // resolved against the manifest's directory
};

/// One `id<TAB>relative-path` per line; blank lines and '#' comments ignored.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& manifest);

struct ObjectEntry {
  std::string id;
  std::filesystem::path path;
  BoundingBox box;  // in the object scene's sensor frame
};

/// `id<TAB>path<TAB>cx<TAB>cy<TAB>cz<TAB>dx<TAB>dy<TAB>dz<TAB>yaw` per line.
std::vector<ObjectEntry> read_object_manifest(const std::filesystem::path& manifest);
void write_object_manifest(const std::vector<ObjectEntry>& entries, const std::filesystem::path& manifest);

/// Background clouds keyed by id. Loads lazily and caches; lookups are safe
/// from multiple threads. An id ending in "#mirror" yields the mirrored cloud.
class BackgroundStore {
 public:
  explicit BackgroundStore(std::vector<ManifestEntry> entries);
  static BackgroundStore from_manifest(const std::filesystem::path& manifest);

  /// Throws Error("unknown background id ...") for ids not in the manifest.
  std::shared_ptr<const PointCloud> get(const std::string& id) const;
  bool contains(const std::string& id) const;
  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<ManifestEntry> entries_;
  std::map<std::string, std::filesystem::path> paths_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const PointCloud>> cache_;
};

/// Background minus the dropped points, then the stored object points, plus
/// the center label grid.
std::pair<PointCloud, CenterGrid> reconstruct(const ComposedScene& scene, const BackgroundStore& store,
                                              std::uint32_t rows, std::uint32_t cols);

}  // namespace lidarfuse
