#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lidarfuse {

/// Sensor-frame point in meters: x forward, y left, z up.
using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Index = std::uint32_t;

/// Ordered point set. Point i keeps index i for the lifetime of the cloud.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points) : points_(std::move(points)) {}

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  const Point3& operator[](std::size_t i) const { return points_[i]; }
  Point3& operator[](std::size_t i) { return points_[i]; }

  void reserve(std::size_t n) { points_.reserve(n); }
  void push_back(const Point3& p) { points_.push_back(p); }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }
  auto begin() noexcept { return points_.begin(); }
  auto end() noexcept { return points_.end(); }

  const std::vector<Point3>& points() const noexcept { return points_; }

  /// Points at `indices`, in the order given. Point j of the result is the
  /// point ranked j among the selected indices when `indices` is ascending.
  PointCloud subset(std::span<const Index> indices) const;

  /// Appends every point of `other`, keeping its order.
  void append(const PointCloud& other);

  friend bool operator==(const PointCloud& a, const PointCloud& b) { return a.points_ == b.points_; }

 private:
  std::vector<Point3> points_;
};

/// Axis-aligned prism in the sensor frame.
struct DetectionRegion {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;

  /// Throws GeometryError unless every lower bound is strictly below its upper bound.
  void validate() const;
  bool contains(const Point3& p) const noexcept;
  bool contains_xy(double x, double y) const noexcept;

  friend bool operator==(const DetectionRegion&, const DetectionRegion&) = default;
};

/// Oriented box. `extent` holds full side lengths along the box's own axes,
/// which are the columns of `rotation`.
struct BoundingBox {
  Point3 center = Point3::Zero();
  Point3 extent = Point3::Ones();
  Matrix3 rotation = Matrix3::Identity();

  static BoundingBox from_yaw(const Point3& center, const Point3& extent, double yaw);

  /// Throws GeometryError if the extent is not strictly positive or the
  /// rotation is not proper orthonormal within 1e-9.
  void validate() const;

  /// Heading of the box x-axis about sensor z.
  double yaw() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Rotation by `angle` radians about +z.
Matrix3 rotation_z(double angle);

/// Lidar beam layout: a fixed set of elevations crossed with `azimuth_count`
/// evenly spaced azimuths covering [0°, 360°).
struct SensorModel {
  std::vector<double> elevation_degrees;
  std::uint32_t azimuth_count = 0;

  /// `count` elevations evenly spaced over [min_deg, max_deg] inclusive.
  static SensorModel evenly_spaced(std::uint32_t elevation_count, double min_deg, double max_deg,
                                   std::uint32_t azimuth_count);

  void validate() const;

  friend bool operator==(const SensorModel&, const SensorModel&) = default;
};

/// Azimuth in (−π, π], 0 along +x and positive toward +y. Throws
/// GeometryError("undefined azimuth") when x = y = 0.
double azimuth(const Point3& p);

/// Distance from the sensor origin.
inline double range(const Point3& p) noexcept { return p.norm(); }

/// Reflects across the sensor x–z plane: (x, y, z) → (x, −y, z).
PointCloud mirror_x(const PointCloud& cloud);
Point3 mirror_x(const Point3& p);
BoundingBox mirror_x(const BoundingBox& box);

/// Rounds every coordinate to the nearest float32.
Point3 quantize(const Point3& p);
PointCloud quantize(const PointCloud& cloud);

bool all_finite(const PointCloud& cloud) noexcept;

}  // namespace lidarfuse
