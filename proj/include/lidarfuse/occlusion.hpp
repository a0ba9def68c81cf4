#pragma once

#include <span>
#include <vector>

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Azimuth window expressed in a frame rotated so that `center` maps to 0;
/// this keeps windows straddling the ±π seam contiguous.
struct AzimuthWindow {
  double center = 0.0;
  double lo = 0.0;  // relative to center, open bound
  double hi = 0.0;  // relative to center, open bound

  /// Circular-mean-centred window spanning `points`, widened by `epsilon`.
  /// Points on the z-axis carry no azimuth and are ignored. Throws
  /// GeometryError when no point has a defined azimuth.
  static AzimuthWindow around(const PointCloud& points, double epsilon);

  /// Azimuth of `p` relative to `center`, wrapped into (−π, π].
  double relative(double az) const noexcept;
  bool contains(double az) const noexcept;
};

/// Background points that can interact with an object: `alpha` shares the
/// object's azimuth window, `beta` ⊆ alpha is no farther than the farthest
/// object point, `gamma` ⊆ alpha is no nearer than the nearest one. Lists hold
/// ascending background indices, so position j is the rank-j point.
struct SectorSubsets {
  std::vector<Index> alpha;
  std::vector<Index> beta;
  std::vector<Index> gamma;
  AzimuthWindow window;
};

/// Per-point azimuth (NaN on the z-axis) and range, computed once per cloud.
struct PolarCache {
  std::vector<double> azimuth;
  std::vector<double> range;

  static PolarCache of(const PointCloud& cloud);
};

/// Throws GeometryError("cannot compute sector of empty object") for an empty object.
SectorSubsets sector_subset(const PointCloud& background, const PointCloud& object, double epsilon);
SectorSubsets sector_subset(const PolarCache& background, const PointCloud& object, double epsilon);

struct OcclusionResult {
  PointCloud kept;
  std::vector<Index> dropped;  // ascending indices into the target
};

/// Drops each target point whose sensor ray passes within `threshold` of an
/// occluder point lying in front of the sensor along that ray.
OcclusionResult ray_occlude(const PointCloud& target, const PointCloud& occluder, double threshold);

/// Indices of `target` points that `ray_occlude` would drop.
std::vector<Index> occluded_indices(std::span<const Point3> target, std::span<const Point3> occluder,
                                    double threshold);

struct SceneOcclusion {
  PointCloud object_kept;
  std::vector<Index> object_dropped;      // into the object cloud
  std::vector<Index> background_dropped;  // original background indices, ascending
  SectorSubsets sectors;
};

/// Object occluded by the near sector (threshold `object_threshold`), far
/// sector occluded by the object (threshold `background_threshold`).
SceneOcclusion occlude_scene(const PointCloud& background, const PointCloud& object, double object_threshold,
                             double background_threshold, double epsilon);
SceneOcclusion occlude_scene(const PointCloud& background, const PolarCache& polar, const PointCloud& object,
                             double object_threshold, double background_threshold, double epsilon);

}  // namespace lidarfuse
