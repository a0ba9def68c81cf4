#include "lidarfuse/core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "lidarfuse/errors.hpp"

namespace lidarfuse {

const char* stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::kLevelObject: return "level-object";
    case Stage::kLevelBackground: return "level-background";
    case Stage::kCrop: return "crop";
    case Stage::kPlacement: return "placement";
    case Stage::kResample: return "resample";
    case Stage::kOcclusion: return "occlusion";
    case Stage::kStore: return "store";
  }
  return "unknown";
}

PointCloud PointCloud::subset(std::span<const Index> indices) const {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (Index i : indices) out.push_back(points_.at(i));
  return PointCloud(std::move(out));
}

void PointCloud::append(const PointCloud& other) {
  points_.insert(points_.end(), other.points_.begin(), other.points_.end());
}

void DetectionRegion::validate() const {
  if (!(x_min < x_max)) throw GeometryError("detection region requires x_min < x_max");
  if (!(y_min < y_max)) throw GeometryError("detection region requires y_min < y_max");
  if (!(z_min < z_max)) throw GeometryError("detection region requires z_min < z_max");
}

bool DetectionRegion::contains(const Point3& p) const noexcept {
  return contains_xy(p.x(), p.y()) && p.z() >= z_min && p.z() <= z_max;
}

bool DetectionRegion::contains_xy(double x, double y) const noexcept {
  return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
}

Matrix3 rotation_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Matrix3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

BoundingBox BoundingBox::from_yaw(const Point3& center, const Point3& extent, double yaw) {
  return BoundingBox{center, extent, rotation_z(yaw)};
}

void BoundingBox::validate() const {
  if (!(extent.array() > 0.0).all()) throw GeometryError("box extent must be strictly positive");
  if (!center.allFinite() || !extent.allFinite() || !rotation.allFinite())
    throw GeometryError("box parameters must be finite");
  const double ortho_err = (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9) throw GeometryError("box rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) throw GeometryError("box rotation is not proper (det != 1)");
}

double BoundingBox::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

SensorModel SensorModel::evenly_spaced(std::uint32_t elevation_count, double min_deg, double max_deg,
                                       std::uint32_t azimuth_count) {
  SensorModel model;
  model.azimuth_count = azimuth_count;
  model.elevation_degrees.reserve(elevation_count);
  if (elevation_count == 1) {
    model.elevation_degrees.push_back(min_deg);
  } else {
    const double step = (max_deg - min_deg) / static_cast<double>(elevation_count - 1);
    for (std::uint32_t i = 0; i < elevation_count; ++i) model.elevation_degrees.push_back(min_deg + step * i);
    model.elevation_degrees.back() = max_deg;
  }
  return model;
}

void SensorModel::validate() const {
  if (elevation_degrees.empty()) throw GeometryError("sensor model needs at least one elevation");
  if (azimuth_count == 0) throw GeometryError("sensor model needs at least one azimuth");
  for (std::size_t i = 0; i < elevation_degrees.size(); ++i) {
    const double e = elevation_degrees[i];
    if (!std::isfinite(e) || e < -90.0 || e > 90.0) throw GeometryError("elevation out of [-90, 90] degrees");
    if (i > 0 && !(elevation_degrees[i - 1] < e)) throw GeometryError("elevations must be strictly ascending");
  }
}

double azimuth(const Point3& p) {
  if (p.x() == 0.0 && p.y() == 0.0) throw GeometryError("undefined azimuth");
  const double a = std::atan2(p.y(), p.x());
  // atan2(-0.0, x<0) yields -pi; fold onto the closed end of (-pi, pi].
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

Point3 mirror_x(const Point3& p) { return {p.x(), -p.y(), p.z()}; }

PointCloud mirror_x(const PointCloud& cloud) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(mirror_x(p));
  return PointCloud(std::move(out));
}

BoundingBox mirror_x(const BoundingBox& box) {
  const Matrix3 m = Eigen::Vector3d(1.0, -1.0, 1.0).asDiagonal();
  return BoundingBox{mirror_x(box.center), box.extent, m * box.rotation * m};
}

Point3 quantize(const Point3& p) {
  return {static_cast<double>(static_cast<float>(p.x())), static_cast<double>(static_cast<float>(p.y())),
          static_cast<double>(static_cast<float>(p.z()))};
}

PointCloud quantize(const PointCloud& cloud) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(quantize(p));
  return PointCloud(std::move(out));
}

bool all_finite(const PointCloud& cloud) noexcept {
  for (const auto& p : cloud)
    if (!p.allFinite()) return false;
  return true;
}

}  // namespace lidarfuse
