#include "lidarfuse/leveling.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lidarfuse/errors.hpp"
#include "lidarfuse/kdtree.hpp"

namespace lidarfuse {
namespace {

// Grid coordinate i of n over [lo, hi]; symmetric ranges give exactly
// negated coordinates for mirrored indices.
double grid_coord(double lo, double hi, std::uint32_t i, std::uint32_t n) {
  if (n == 1) return 0.5 * (lo + hi);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double num = 2.0 * static_cast<double>(i) - static_cast<double>(n - 1);
  return mid + half * num / static_cast<double>(n - 1);
}

Matrix3 skew(const Point3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace

PointCloud build_ground_grid(const PointCloud& cloud, const LevelingParams& params) {
  if (params.grid_size == 0) throw GroundFitError("ground grid size must be positive");
  const GroundRegion& region = params.region;
  std::vector<double> zs;
  for (const auto& p : cloud)
    if (region.contains_xy(p)) zs.push_back(p.z());
  if (zs.empty()) throw GroundFitError("no points in ground grid region");

  double z = 0.0;
  if (params.z_percentile <= 0.0) {
    z = *std::min_element(zs.begin(), zs.end());
  } else {
    const double q = std::min(params.z_percentile, 1.0);
    auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(zs.size() - 1)));
    std::nth_element(zs.begin(), zs.begin() + static_cast<std::ptrdiff_t>(k), zs.end());
    z = zs[k];
  }

  const std::uint32_t g = params.grid_size;
  std::vector<Point3> grid;
  grid.reserve(static_cast<std::size_t>(g) * g);
  for (std::uint32_t i = 0; i < g; ++i) {
    const double x = grid_coord(region.x_min, region.x_max, i, g);
    for (std::uint32_t j = 0; j < g; ++j) grid.emplace_back(x, grid_coord(-region.y_max, region.y_max, j, g), z);
  }
  return PointCloud(std::move(grid));
}

PointCloud extract_ground_points(const PointCloud& cloud, const PointCloud& grid, const GroundRegion& region) {
  if (grid.empty()) throw GroundFitError("ground grid is empty");
  std::vector<Index> in_region;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (region.contains_xy(cloud[i])) in_region.push_back(static_cast<Index>(i));
  if (in_region.empty()) throw GroundFitError("no points in ground grid region");

  const PointCloud candidates = cloud.subset(in_region);
  const KdTree tree(candidates);
  std::vector<char> hit(candidates.size(), 0);
  for (const auto& g : grid) hit[tree.nearest(g)] = 1;

  std::vector<Index> selected;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (hit[k]) selected.push_back(in_region[k]);
  return cloud.subset(selected);
}

GroundPlane fit_ground_plane(const PointCloud& ground) {
  const std::size_t n = ground.size();
  if (n < 3) throw GroundFitError("degenerate ground fit: fewer than 3 points");

  // Centered normal equations: the intercept decouples and the 2×2 slope
  // system stays well conditioned far from the origin.
  Point3 mean = Point3::Zero();
  for (const auto& p : ground) mean += p;
  mean /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0, syy = 0.0, sxz = 0.0, syz = 0.0;
  for (const auto& p : ground) {
    const double dx = p.x() - mean.x();
    const double dy = p.y() - mean.y();
    const double dz = p.z() - mean.z();
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    sxz += dx * dz;
    syz += dy * dz;
  }
  const double det = sxx * syy - sxy * sxy;
  if (!(det > 1e-12 * sxx * syy) || sxx <= 0.0 || syy <= 0.0)
    throw GroundFitError("degenerate ground fit: collinear ground footprint");

  GroundPlane plane;
  plane.b1 = (syy * sxz - sxy * syz) / det;
  plane.b2 = (sxx * syz - sxy * sxz) / det;
  plane.b0 = mean.z() - plane.b1 * mean.x() - plane.b2 * mean.y();
  return plane;
}

LevelTransform level_transform(const GroundPlane& plane) {
  const Point3 h = plane.normal();
  const Point3 unit = h / h.norm();
  const Point3 v = unit.cross(Point3::UnitZ());
  const Matrix3 vx = skew(v);
  LevelTransform t;
  t.rotation = Matrix3::Identity() + vx + vx * vx / (1.0 + unit.z());
  // Every plane point p satisfies p·unit = b0/‖h‖, which is its height after rotation.
  t.translation = Point3(0.0, 0.0, plane.b0 * unit.z());
  return t;
}

PointCloud level(const PointCloud& cloud, const LevelTransform& t) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(t.apply(p));
  return PointCloud(std::move(out));
}

PointCloud unlevel(const PointCloud& cloud, const LevelTransform& t) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(t.invert(p));
  return PointCloud(std::move(out));
}

BoundingBox level(const BoundingBox& box, const LevelTransform& t) {
  return BoundingBox{t.apply(box.center), box.extent, t.rotation * box.rotation};
}

BoundingBox unlevel(const BoundingBox& box, const LevelTransform& t) {
  return BoundingBox{t.invert(box.center), box.extent, t.rotation.transpose() * box.rotation};
}

LevelTransform estimate_level_transform(const PointCloud& cloud, const LevelingParams& params) {
  const PointCloud grid = build_ground_grid(cloud, params);
  const PointCloud ground = extract_ground_points(cloud, grid, params.region);
  return level_transform(fit_ground_plane(ground));
}

}  // namespace lidarfuse
