#pragma once

#include <cstdint>

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Rectangle x ∈ [x_min, x_max], y ∈ [−y_max, y_max] sampled by the ground grid.
struct GroundRegion {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains_xy(const Point3& p) const noexcept {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= -y_max && p.y() <= y_max;
  }

  friend bool operator==(const GroundRegion&, const GroundRegion&) = default;
};

struct LevelingParams {
  GroundRegion region;
  /// Grid resolution per side; the grid has grid_size² points.
  std::uint32_t grid_size = 20;
  /// Quantile of in-region z used as the grid height. 0 takes the minimum;
  /// raising it guards against a single spurious low return.
  double z_percentile = 0.0;

  friend bool operator==(const LevelingParams&, const LevelingParams&) = default;
};

/// Fitted ground plane z = b0 + b1·x + b2·y.
struct GroundPlane {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;

  /// Unnormalized upward normal [−b1, −b2, 1].
  Point3 normal() const { return {-b1, -b2, 1.0}; }
  Point3 unit_normal() const { return normal().normalized(); }
};

/// Rigid motion taking a scene into its leveled frame: p ↦ R·p − t.
struct LevelTransform {
  Matrix3 rotation = Matrix3::Identity();
  Point3 translation = Point3::Zero();

  Point3 apply(const Point3& p) const { return rotation * p - translation; }
  Point3 invert(const Point3& p) const { return rotation.transpose() * (p + translation); }
};

/// G×G points spanning the region (endpoints included), all at the minimum
/// (or configured quantile) z of the in-region scene points. Row-major in x.
PointCloud build_ground_grid(const PointCloud& cloud, const LevelingParams& params);

/// In-region scene points that are the exact 3D nearest neighbor of at least
/// one grid point. Each point appears once; original order is kept.
PointCloud extract_ground_points(const PointCloud& cloud, const PointCloud& grid, const GroundRegion& region);

/// Ordinary least squares of z on (1, x, y). Throws GroundFitError("degenerate
/// ground fit") for fewer than three points or a collinear xy footprint.
GroundPlane fit_ground_plane(const PointCloud& ground);

/// Rotation aligning the plane's unit normal with +z (Rodrigues) and the
/// offset that puts the rotated plane at z = 0.
LevelTransform level_transform(const GroundPlane& plane);

PointCloud level(const PointCloud& cloud, const LevelTransform& t);
PointCloud unlevel(const PointCloud& cloud, const LevelTransform& t);
BoundingBox level(const BoundingBox& box, const LevelTransform& t);
BoundingBox unlevel(const BoundingBox& box, const LevelTransform& t);

/// Full estimate: grid, ground points, plane fit, transform.
LevelTransform estimate_level_transform(const PointCloud& cloud, const LevelingParams& params);

}  // namespace lidarfuse
