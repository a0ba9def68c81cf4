#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lidarfuse/beam_model.hpp"
#include "lidarfuse/core.hpp"
#include "lidarfuse/leveling.hpp"
#include "lidarfuse/occlusion.hpp"
#include "lidarfuse/placement.hpp"

namespace lidarfuse {

struct CompositionParams {
  std::shared_ptr<const BeamGrid> beams;
  std::string sensor_preset;
  DetectionRegion region;
  LevelingParams object_leveling;
  LevelingParams background_leveling;
  double object_threshold = 0.04;      // object points hidden by nearer background
  double background_threshold = 0.03;  // background points hidden by the object
  double beam_threshold = 0.04;        // resampling distance to a beam
  double epsilon = 0.02;               // azimuth window tolerance, radians
  /// Inserted objects with fewer surviving points than this are rejected.
  std::uint32_t min_visible_points = 0;
  std::uint32_t max_objects = 10;
  bool strict = false;
};

/// Background scene with its leveling transform and polar cache.
struct PreparedBackground {
  std::string id;
  PointCloud cloud;
  LevelTransform transform;
  PolarCache polar;

  static PreparedBackground prepare(std::string id, PointCloud cloud, const LevelingParams& params);
};

/// Object cropped out of its leveled scene, with its leveled box.
struct PreparedObject {
  std::string id;
  PointCloud points;
  BoundingBox box;

  static PreparedObject prepare(std::string id, const PointCloud& scene, const BoundingBox& box,
                                const LevelingParams& params);
};

/// One object rendered into the background sensor frame, ready to be merged.
struct ObjectInsertion {
  std::string object_id;
  PlacementTarget target;
  PointCloud points;       // beam-resampled, float32-rounded
  BoundingBox box;         // final frame, heading-only, float32-rounded
  BoundingBox leveled_box; // placed box in the leveled background frame
};

/// Place, return to the background frame, and resample on the beam grid.
ObjectInsertion render_insertion(const PreparedObject& object, const PlacementTarget& target,
                                 const PreparedBackground& background, const CompositionParams& params);

struct ObjectProvenance {
  std::string object_id;
  PlacementTarget target;

  friend bool operator==(const ObjectProvenance&, const ObjectProvenance&) = default;
};

/// Scene stored as edits to an untouched background: surviving object points
/// plus the indices of background points hidden by them.
struct ComposedScene {
  std::string background_id;
  std::uint32_t background_point_count = 0;
  PointCloud object_points;
  std::vector<Index> background_dropped;
  std::vector<BoundingBox> boxes;
  DetectionRegion region;
  std::string sensor_preset;
  std::uint64_t seed = 0;
  std::vector<ObjectProvenance> objects;

  /// Throws FormatError if drops are not strictly ascending and in bounds, or
  /// a box center falls outside the region.
  void validate() const;

  friend bool operator==(const ComposedScene&, const ComposedScene&) = default;
};

/// Background minus dropped points (original order), then object points.
PointCloud expand(const ComposedScene& scene, const PointCloud& background);

/// Incrementally merges objects into a background; each insertion treats the
/// current composite as its background.
class SceneComposer {
 public:
  SceneComposer(const PreparedBackground& background, const CompositionParams& params, std::uint64_t seed = 0);

  /// Occludes the new object against the composite and vice versa, then
  /// commits it. Throws CompositionError (composite unchanged) if its box
  /// overlaps an earlier one or too few points survive.
  void insert(const ObjectInsertion& insertion);

  std::size_t object_count() const noexcept { return boxes_.size(); }
  ComposedScene finish() const;

 private:
  const PreparedBackground& background_;
  const CompositionParams& params_;
  std::uint64_t seed_;
  std::vector<char> background_dropped_;
  std::vector<Point3> object_points_;
  std::vector<char> object_alive_;
  std::vector<BoundingBox> boxes_;
  std::vector<BoundingBox> leveled_boxes_;
  std::vector<ObjectProvenance> provenance_;
};

ComposedScene compose_single(const PreparedBackground& background, const PreparedObject& object,
                             const PlacementTarget& target, const CompositionParams& params, std::uint64_t seed = 0);

/// Convenience entry taking raw scenes; levels both with `params`.
ComposedScene compose_single(const std::string& background_id, const PointCloud& background,
                             const std::string& object_id, const PointCloud& object_scene,
                             const BoundingBox& object_box, const PlacementTarget& target,
                             const CompositionParams& params, std::uint64_t seed = 0);

struct SkippedObject {
  std::string object_id;
  std::string reason;
};

struct MultiComposition {
  ComposedScene scene;
  std::vector<SkippedObject> skipped;
};

/// Inserts objects nearest-target first. A failing object is skipped and
/// reported unless params.strict, in which case the error propagates.
MultiComposition compose_multi(const PreparedBackground& background, const std::vector<const PreparedObject*>& objects,
                               const std::vector<PlacementTarget>& targets, const CompositionParams& params,
                               std::uint64_t seed = 0);

/// True when the xy footprints of two boxes intersect.
bool footprints_overlap(const BoundingBox& a, const BoundingBox& b);

/// Binary raster of box centers over the region's x (rows) and y (cols).
struct CenterGrid {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  DetectionRegion region;
  std::vector<std::uint8_t> cells;  // row-major

  std::uint8_t at(std::uint32_t r, std::uint32_t c) const { return cells.at(static_cast<std::size_t>(r) * cols + c); }
  std::size_t count() const;

  friend bool operator==(const CenterGrid&, const CenterGrid&) = default;
};

/// Cell (i, j) covers x ∈ [x_min + i·Δx, x_min + (i+1)·Δx) and likewise in y.
/// Throws GeometryError("label out of detection region") for centers outside.
CenterGrid rasterize_centers(const std::vector<BoundingBox>& boxes, const DetectionRegion& region,
                             std::uint32_t rows, std::uint32_t cols);

}  // namespace lidarfuse
