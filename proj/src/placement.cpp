#include "lidarfuse/placement.hpp"

#include <cmath>
#include <vector>

#include "lidarfuse/errors.hpp"

namespace lidarfuse {

PlacementTarget::PlacementTarget(double x, double y) : rho_(x, y, 0.0) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw GeometryError("placement target must be finite");
  if (x == 0.0 && y == 0.0) throw GeometryError("undefined placement direction");
}

PointCloud crop_object(const PointCloud& scene, const BoundingBox& box) {
  constexpr double kSlack = 1e-9;
  const Point3 half = 0.5 * box.extent + Point3::Constant(kSlack);
  const Matrix3 to_box = box.rotation.transpose();
  std::vector<Point3> kept;
  for (const auto& p : scene) {
    const Point3 local = to_box * (p - box.center);
    if ((local.cwiseAbs().array() <= half.array()).all()) kept.push_back(p);
  }
  return PointCloud(std::move(kept));
}

PlacementMotion placement_motion(const Point3& center, const PlacementTarget& target) {
  if (center.x() == 0.0 && center.y() == 0.0) throw GeometryError("undefined placement direction");
  const Point3 ground_center(center.x(), center.y(), 0.0);
  const double ground_dist = ground_center.norm();
  PlacementMotion m;
  m.theta = std::atan2(target.y(), target.x()) - std::atan2(center.y(), center.x());
  m.translation = target.rho().norm() * (ground_center / ground_dist) - ground_center;
  m.rotation = rotation_z(m.theta);
  return m;
}

PlacedObject place_object(const PointCloud& object, const BoundingBox& box, const PlacementTarget& target) {
  PlacedObject out;
  out.motion = placement_motion(box.center, target);
  std::vector<Point3> moved;
  moved.reserve(object.size());
  for (const auto& p : object) moved.push_back(out.motion.apply(p));
  out.points = PointCloud(std::move(moved));
  out.box = BoundingBox{out.motion.apply(box.center), box.extent, out.motion.rotation * box.rotation};
  return out;
}

BoundingBox place_box(const BoundingBox& box, const PlacementTarget& target) {
  const PlacementMotion m = placement_motion(box.center, target);
  return BoundingBox{m.apply(box.center), box.extent, m.rotation * box.rotation};
}

}  // namespace lidarfuse
