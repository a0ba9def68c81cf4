#include "lidarfuse/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lidarfuse/angular_index.hpp"
#include "lidarfuse/errors.hpp"

namespace lidarfuse {
namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double a) noexcept {
  // Inputs differ by at most 2π from the target range.
  if (a > kPi) a -= 2.0 * kPi;
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

AzimuthWindow AzimuthWindow::around(const PointCloud& points, double epsilon) {
  double sum_sin = 0.0;
  double sum_cos = 0.0;
  std::vector<double> az;
  az.reserve(points.size());
  for (const auto& p : points) {
    if (p.x() == 0.0 && p.y() == 0.0) continue;
    const double a = azimuth(p);
    az.push_back(a);
    sum_sin += std::sin(a);
    sum_cos += std::cos(a);
  }
  if (az.empty()) throw GeometryError("object has no point with a defined azimuth");

  AzimuthWindow w;
  w.center = (sum_sin == 0.0 && sum_cos == 0.0) ? az.front() : std::atan2(sum_sin, sum_cos);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double a : az) {
    const double rel = w.relative(a);
    lo = std::min(lo, rel);
    hi = std::max(hi, rel);
  }
  w.lo = lo - epsilon;
  w.hi = hi + epsilon;
  return w;
}

double AzimuthWindow::relative(double az) const noexcept { return wrap(az - center); }

bool AzimuthWindow::contains(double az) const noexcept {
  if (hi - lo >= 2.0 * kPi) return true;
  const double rel = relative(az);
  return lo < rel && rel < hi;
}

PolarCache PolarCache::of(const PointCloud& cloud) {
  PolarCache c;
  c.azimuth.resize(cloud.size());
  c.range.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    c.azimuth[i] = (p.x() == 0.0 && p.y() == 0.0) ? std::numeric_limits<double>::quiet_NaN() : lidarfuse::azimuth(p);
    c.range[i] = lidarfuse::range(p);
  }
  return c;
}

SectorSubsets sector_subset(const PointCloud& background, const PointCloud& object, double epsilon) {
  return sector_subset(PolarCache::of(background), object, epsilon);
}

SectorSubsets sector_subset(const PolarCache& background, const PointCloud& object, double epsilon) {
  if (object.empty()) throw GeometryError("cannot compute sector of empty object");
  SectorSubsets s;
  s.window = AzimuthWindow::around(object, epsilon);
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0.0;
  for (const auto& p : object) {
    r_min = std::min(r_min, range(p));
    r_max = std::max(r_max, range(p));
  }
  for (std::size_t i = 0; i < background.azimuth.size(); ++i) {
    const double az = background.azimuth[i];
    if (std::isnan(az) || !s.window.contains(az)) continue;
    const auto idx = static_cast<Index>(i);
    s.alpha.push_back(idx);
    const double r = background.range[i];
    if (r <= r_max) s.beta.push_back(idx);
    if (r >= r_min) s.gamma.push_back(idx);
  }
  return s;
}

std::vector<Index> occluded_indices(std::span<const Point3> target, std::span<const Point3> occluder,
                                    double threshold) {
  std::vector<Index> dropped;
  if (occluder.empty() || target.empty()) return dropped;
  const RayProximityIndex index(occluder, threshold);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double r = target[i].norm();
    if (r == 0.0) continue;
    const Point3 dir = target[i] / r;
    bool hit = false;
    index.visit(dir, [&](Index, const RayOffset&) { hit = true; });
    if (hit) dropped.push_back(static_cast<Index>(i));
  }
  return dropped;
}

OcclusionResult ray_occlude(const PointCloud& target, const PointCloud& occluder, double threshold) {
  if (!(threshold > 0.0)) throw GeometryError("occlusion threshold must be positive");
  OcclusionResult res;
  res.dropped = occluded_indices(target.points(), occluder.points(), threshold);
  std::vector<Point3> kept;
  kept.reserve(target.size() - res.dropped.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (next < res.dropped.size() && res.dropped[next] == i) {
      ++next;
      continue;
    }
    kept.push_back(target[i]);
  }
  res.kept = PointCloud(std::move(kept));
  return res;
}

SceneOcclusion occlude_scene(const PointCloud& background, const PointCloud& object, double object_threshold,
                             double background_threshold, double epsilon) {
  return occlude_scene(background, PolarCache::of(background), object, object_threshold, background_threshold,
                       epsilon);
}

SceneOcclusion occlude_scene(const PointCloud& background, const PolarCache& polar, const PointCloud& object,
                             double object_threshold, double background_threshold, double epsilon) {
  SceneOcclusion out;
  out.sectors = sector_subset(polar, object, epsilon);

  const PointCloud near = background.subset(out.sectors.beta);
  OcclusionResult obj = ray_occlude(object, near, object_threshold);
  out.object_kept = std::move(obj.kept);
  out.object_dropped = std::move(obj.dropped);

  const PointCloud far = background.subset(out.sectors.gamma);
  const std::vector<Index> far_dropped = ray_occlude(far, object, background_threshold).dropped;
  out.background_dropped.reserve(far_dropped.size());
  // Rank j in gamma maps back to gamma[j]; gamma is ascending so the result is too.
  for (Index j : far_dropped) out.background_dropped.push_back(out.sectors.gamma[j]);
  return out;
}

}  // namespace lidarfuse
