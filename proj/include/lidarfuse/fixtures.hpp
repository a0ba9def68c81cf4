#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lidarfuse/beam_model.hpp"
#include "lidarfuse/core.hpp"

namespace lidarfuse::fixtures {

/// Infinite plane n·p = offset (n need not be unit).
struct Plane {
  Point3 normal{0.0, 0.0, 1.0};
  double offset = 0.0;
};

struct Sphere {
  Point3 center = Point3::Zero();
  double radius = 1.0;
};

/// Solid right circular cone: lateral surface plus base disk. `axis` points
/// from the apex toward the base center.
struct Cone {
  Point3 apex = Point3::Zero();
  Point3 axis{0.0, 0.0, -1.0};
  double height = 1.0;
  double radius = 0.5;
  Point3 base_center() const { return apex + axis.normalized() * height; }
};

/// Vertical rectangle centered at `center`; `heading` is the azimuth of its
/// normal. Spans `width` horizontally and `height` vertically.
struct Wall {
  Point3 center = Point3::Zero();
  double heading = 0.0;
  double width = 1.0;
  double height = 1.0;
};

using Shape = std::variant<Plane, Sphere, Cone, Wall>;

/// Smallest s > 0 with s·dir on the shape, if any. `dir` must be unit length.
std::optional<double> intersect(const Shape& shape, const Point3& dir);

/// Tight box for cones and spheres; none for unbounded or flat shapes.
std::optional<BoundingBox> bounding_box(const Shape& shape);

/// First hit per beam across all shapes, kept when within `max_range`.
/// Points are ordered by beam index; `beams` (optional) receives the index.
PointCloud raycast(std::span<const Shape> shapes, const BeamGrid& grid, double max_range,
                   std::vector<Index>* beams = nullptr);

struct Fixture {
  PointCloud cloud;
  std::optional<BoundingBox> box;
  std::string warning;  // set when no beam hits the shape
};

Fixture make_fixture(const Shape& shape, const SensorModel& sensor, double max_range = 120.0);

/// Cone whose base disk faces the sensor, base center at (distance, 0, 0).
Cone facing_cone(double distance, double radius = 0.5, double height = 1.0);

/// Synthetic background and object stores on disk.
struct StoreSpec {
  SensorModel sensor = SensorModel::evenly_spaced(32, -22.5, 22.5, 512);
  std::uint32_t backgrounds = 3;
  std::uint32_t objects = 3;
  std::uint64_t seed = 1;
  double sensor_height = 1.5;  // ground sits this far below the sensor
  double max_tilt = 0.03;      // |b1|, |b2| bound for ground slope
  double max_range = 40.0;
  std::uint32_t trees = 8;
};

struct StorePaths {
  std::filesystem::path background_manifest;
  std::filesystem::path object_manifest;
};

/// Writes backgrounds/*.pcd, objects/*.pcd, backgrounds.txt and objects.txt
/// under `dir`. Backgrounds are tilted ground with trees; each object scene
/// is tilted ground with one person-sized figure about 4 m ahead.
StorePaths write_store(const std::filesystem::path& dir, const StoreSpec& spec);

/// Scenes behind write_store, exposed for in-memory tests.
PointCloud background_scene(const StoreSpec& spec, std::uint32_t index, const BeamGrid& grid);
std::pair<PointCloud, BoundingBox> object_scene(const StoreSpec& spec, std::uint32_t index, const BeamGrid& grid);

}  // namespace lidarfuse::fixtures
