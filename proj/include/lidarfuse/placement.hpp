#pragma once

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Ground location in the leveled frame where an object's box center should
/// end up. z is always 0 and (x, y) must not be the origin.
class PlacementTarget {
 public:
  PlacementTarget(double x, double y);

  const Point3& rho() const noexcept { return rho_; }
  double x() const noexcept { return rho_.x(); }
  double y() const noexcept { return rho_.y(); }

  friend bool operator==(const PlacementTarget&, const PlacementTarget&) = default;

 private:
  Point3 rho_;
};

/// Points p with Rᵀ(p − c) inside [−d/2, d/2] on every axis. Boundary points
/// are kept (1e-9 m slack absorbs rounding on the faces).
PointCloud crop_object(const PointCloud& scene, const BoundingBox& box);

/// The restricted motion used for placement: translate by `translation`
/// (radial, in the ground plane), then rotate about sensor z by `theta`.
struct PlacementMotion {
  double theta = 0.0;
  Point3 translation = Point3::Zero();
  Matrix3 rotation = Matrix3::Identity();

  Point3 apply(const Point3& p) const { return rotation * (p + translation); }
};

/// Motion carrying the leveled box center `center` to `target` while keeping
/// the object's orientation relative to the sensor's line of sight. Throws
/// GeometryError when the center lies on the sensor z-axis.
PlacementMotion placement_motion(const Point3& center, const PlacementTarget& target);

struct PlacedObject {
  PointCloud points;
  BoundingBox box;
  PlacementMotion motion;
};

/// Moves a cropped, leveled object so its box center lands over `target`.
PlacedObject place_object(const PointCloud& object, const BoundingBox& box, const PlacementTarget& target);

/// Box after placement, without moving any points.
BoundingBox place_box(const BoundingBox& box, const PlacementTarget& target);

}  // namespace lidarfuse
