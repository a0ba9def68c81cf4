#include "lidarfuse/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lidarfuse/errors.hpp"
#include "lidarfuse/pcd.hpp"
#include "lidarfuse/sampling.hpp"
#include "lidarfuse/store.hpp"

namespace lidarfuse::fixtures {
namespace {

using Hit = std::optional<double>;

void keep_nearest(Hit& best, double s) {
  if (s > 0.0 && std::isfinite(s) && (!best || s < *best)) best = s;
}

Hit hit(const Plane& plane, const Point3& d) {
  const double nd = plane.normal.dot(d);
  if (nd == 0.0) return std::nullopt;
  Hit best;
  keep_nearest(best, plane.offset / nd);
  return best;
}

Hit hit(const Sphere& sphere, const Point3& d) {
  // |s·d − c|² = r² with |d| = 1.
  const double b = d.dot(sphere.center);
  const double c = sphere.center.squaredNorm() - sphere.radius * sphere.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  Hit best;
  keep_nearest(best, b - root);
  if (!best) keep_nearest(best, b + root);
  return best;
}

Hit hit(const Cone& cone, const Point3& d) {
  const Point3 a = cone.axis.normalized();
  const double k = cone.radius / cone.height;
  const double cos2 = 1.0 / (1.0 + k * k);
  const Point3 w = -cone.apex;  // origin relative to apex
  const double da = d.dot(a);
  const double wa = w.dot(a);
  // Lateral surface: ((p−V)·a)² = cos²·|p−V|², with 0 ≤ (p−V)·a ≤ h.
  const double qa = da * da - cos2;
  const double qb = 2.0 * (da * wa - cos2 * d.dot(w));
  const double qc = wa * wa - cos2 * w.squaredNorm();
  Hit best;
  const auto lateral = [&](double s) {
    const double h = s * da + wa;
    if (h >= 0.0 && h <= cone.height) keep_nearest(best, s);
  };
  if (qa != 0.0) {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      lateral((-qb - root) / (2.0 * qa));
      lateral((-qb + root) / (2.0 * qa));
    }
  } else if (qb != 0.0) {
    lateral(-qc / qb);
  }
  // Base disk.
  if (da != 0.0) {
    const Point3 base = cone.base_center();
    const double s = base.dot(a) / da;
    if ((s * d - base).squaredNorm() <= cone.radius * cone.radius) keep_nearest(best, s);
  }
  return best;
}

Hit hit(const Wall& wall, const Point3& d) {
  const Point3 n(std::cos(wall.heading), std::sin(wall.heading), 0.0);
  const double nd = n.dot(d);
  if (nd == 0.0) return std::nullopt;
  const double s = n.dot(wall.center) / nd;
  if (!(s > 0.0)) return std::nullopt;
  const Point3 local = s * d - wall.center;
  const Point3 u(-n.y(), n.x(), 0.0);
  if (std::abs(local.dot(u)) > wall.width / 2.0 || std::abs(local.z()) > wall.height / 2.0) return std::nullopt;
  return s;
}

/// Conservative bounding sphere used to skip beams cheaply; none for planes.
std::optional<Sphere> bounds_of(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> std::optional<Sphere> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return s;
        } else if constexpr (std::is_same_v<T, Cone>) {
          const Point3 mid = s.apex + s.axis.normalized() * (s.height / 2.0);
          return Sphere{mid, std::hypot(s.height / 2.0, s.radius) * (1.0 + 1e-9) + 1e-9};
        } else if constexpr (std::is_same_v<T, Wall>) {
          return Sphere{s.center, std::hypot(s.width, s.height) / 2.0 * (1.0 + 1e-9) + 1e-9};
        } else {
          return std::nullopt;
        }
      },
      shape);
}

}  // namespace

std::optional<double> intersect(const Shape& shape, const Point3& dir) {
  return std::visit([&](const auto& s) { return hit(s, dir); }, shape);
}

std::optional<BoundingBox> bounding_box(const Shape& shape) {
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    return BoundingBox{s->center, Point3::Constant(2.0 * s->radius), Matrix3::Identity()};
  }
  if (const auto* c = std::get_if<Cone>(&shape)) {
    const Point3 a = c->axis.normalized();
    const Point3 center = c->apex + a * (c->height / 2.0);
    if (std::abs(a.z()) == 1.0)
      return BoundingBox{center, Point3(2.0 * c->radius, 2.0 * c->radius, c->height), Matrix3::Identity()};
    if (a.z() == 0.0)
      return BoundingBox::from_yaw(center, Point3(c->height, 2.0 * c->radius, 2.0 * c->radius),
                                   std::atan2(a.y(), a.x()));
    const Point3 b = Point3::UnitZ().cross(a).normalized();
    Matrix3 r;
    r.col(0) = a;
    r.col(1) = b;
    r.col(2) = a.cross(b);
    return BoundingBox{center, Point3(c->height, 2.0 * c->radius, 2.0 * c->radius), r};
  }
  return std::nullopt;
}

PointCloud raycast(std::span<const Shape> shapes, const BeamGrid& grid, double max_range, std::vector<Index>* beams) {
  std::vector<std::optional<Sphere>> bounds;
  bounds.reserve(shapes.size());
  for (const auto& s : shapes) bounds.push_back(bounds_of(s));

  PointCloud out;
  if (beams) beams->clear();
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const Point3& d = grid.directions[a];
    Hit best;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      if (bounds[i]) {
        // Skip when the ray misses the bounding sphere.
        const double along = d.dot(bounds[i]->center);
        const double r = bounds[i]->radius;
        if (along < -r) continue;
        const double perp2 = bounds[i]->center.squaredNorm() - along * along;
        if (perp2 > r * r) continue;
      }
      if (const Hit s = intersect(shapes[i], d)) keep_nearest(best, *s);
    }
    if (best && *best <= max_range) {
      out.push_back(*best * d);
      if (beams) beams->push_back(static_cast<Index>(a));
    }
  }
  return out;
}

Fixture make_fixture(const Shape& shape, const SensorModel& sensor, double max_range) {
  if (const auto* s = std::get_if<Sphere>(&shape); s && !(s->radius > 0.0))
    throw GeometryError("sphere radius must be positive");
  if (const auto* c = std::get_if<Cone>(&shape); c && !(c->radius > 0.0 && c->height > 0.0 && c->axis.norm() > 0.0))
    throw GeometryError("cone needs positive radius, height and axis");
  if (const auto* w = std::get_if<Wall>(&shape); w && !(w->width > 0.0 && w->height > 0.0))
    throw GeometryError("wall needs positive width and height");
  if (const auto* p = std::get_if<Plane>(&shape); p && !(p->normal.norm() > 0.0))
    throw GeometryError("plane normal must be nonzero");

  const BeamGrid grid = beam_directions(sensor);
  Fixture f;
  f.cloud = raycast(std::span<const Shape>(&shape, 1), grid, max_range);
  f.box = bounding_box(shape);
  if (f.cloud.empty()) f.warning = "shape is outside all beams";
  return f;
}

Cone facing_cone(double distance, double radius, double height) {
  return Cone{Point3(distance + height, 0.0, 0.0), Point3(-1.0, 0.0, 0.0), height, radius};
}

namespace {

Plane tilted_ground(SceneRng& rng, const StoreSpec& spec) {
  const double b1 = rng.uniform(-spec.max_tilt, spec.max_tilt);
  const double b2 = rng.uniform(-spec.max_tilt, spec.max_tilt);
  const double b0 = -spec.sensor_height + rng.uniform(-0.05, 0.05);
  // z = b0 + b1·x + b2·y  ⇔  (−b1, −b2, 1)·p = b0
  return Plane{Point3(-b1, -b2, 1.0), b0};
}

double ground_z(const Plane& g, double x, double y) {
  return (g.offset - g.normal.x() * x - g.normal.y() * y) / g.normal.z();
}

}  // namespace

PointCloud background_scene(const StoreSpec& spec, std::uint32_t index, const BeamGrid& grid) {
  SceneRng rng(mix64(spec.seed) ^ mix64(0xB0000000ULL + index));
  std::vector<Shape> shapes;
  const Plane ground = tilted_ground(rng, spec);
  shapes.push_back(ground);
  for (std::uint32_t t = 0; t < spec.trees; ++t) {
    // Trees line two rows either side of the sensor.
    const double x = rng.uniform(2.0, spec.max_range * 0.6);
    const double side = rng.below(2) == 0 ? 1.0 : -1.0;
    const double y = side * rng.uniform(2.5, 6.0);
    const double zg = ground_z(ground, x, y);
    const double trunk_h = rng.uniform(1.2, 2.0);
    shapes.push_back(Cone{Point3(x, y, zg + trunk_h), Point3(0.0, 0.0, -1.0), trunk_h + 0.2, rng.uniform(0.08, 0.2)});
    shapes.push_back(Sphere{Point3(x, y, zg + trunk_h + 0.6), rng.uniform(0.6, 1.1)});
  }
  const double wall_x = spec.max_range * rng.uniform(0.7, 0.9);
  shapes.push_back(Wall{Point3(wall_x, 0.0, ground_z(ground, wall_x, 0.0) + 1.5), 0.0, 30.0, 3.0});
  return raycast(shapes, grid, spec.max_range);
}

std::pair<PointCloud, BoundingBox> object_scene(const StoreSpec& spec, std::uint32_t index, const BeamGrid& grid) {
  SceneRng rng(mix64(spec.seed) ^ mix64(0x0B000000ULL + index));
  const Plane ground = tilted_ground(rng, spec);
  const double x = rng.uniform(3.5, 4.5);
  const double y = rng.uniform(-0.5, 0.5);
  const double zg = ground_z(ground, x, y);
  const double body_r = rng.uniform(0.18, 0.28);
  const double body_top = rng.uniform(1.35, 1.55);
  const double head_r = rng.uniform(0.1, 0.13);
  std::vector<Shape> shapes{
      ground,
      Cone{Point3(x, y, zg + body_top), Point3(0.0, 0.0, -1.0), body_top - 0.1, body_r},
      Sphere{Point3(x, y, zg + body_top + head_r * 0.8), head_r},
  };
  const double bottom = zg + 0.05;
  const double top = zg + body_top + head_r * 1.8 + 0.02;
  const double half = std::max(body_r, head_r) + 0.05;
  const BoundingBox box = BoundingBox::from_yaw(Point3(x, y, (bottom + top) / 2.0),
                                                Point3(2.0 * half, 2.0 * half, top - bottom), rng.uniform(-0.3, 0.3));
  return {raycast(shapes, grid, spec.max_range), box};
}

StorePaths write_store(const std::filesystem::path& dir, const StoreSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "backgrounds");
  fs::create_directories(dir / "objects");
  const BeamGrid grid = beam_directions(spec.sensor);

  char name[32];
  std::vector<ManifestEntry> backgrounds;
  for (std::uint32_t i = 0; i < spec.backgrounds; ++i) {
    std::snprintf(name, sizeof name, "bg%04u", i);
    const fs::path rel = fs::path("backgrounds") / (std::string(name) + ".pcd");
    write_pcd(background_scene(spec, i, grid), dir / rel);
    backgrounds.push_back({name, rel});
  }
  std::vector<ObjectEntry> objects;
  for (std::uint32_t i = 0; i < spec.objects; ++i) {
    std::snprintf(name, sizeof name, "obj%04u", i);
    const fs::path rel = fs::path("objects") / (std::string(name) + ".pcd");
    auto [cloud, box] = object_scene(spec, i, grid);
    write_pcd(cloud, dir / rel);
    // Stored boxes are float32 like the clouds they describe.
    box = BoundingBox::from_yaw(quantize(box.center), quantize(box.extent),
                                static_cast<double>(static_cast<float>(box.yaw())));
    objects.push_back({name, rel, box});
  }
  StorePaths paths{dir / "backgrounds.txt", dir / "objects.txt"};
  write_manifest(backgrounds, paths.background_manifest);
  write_object_manifest(objects, paths.object_manifest);
  return paths;
}

}  // namespace lidarfuse::fixtures
