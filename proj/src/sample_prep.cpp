#include "lidarfuse/sample_prep.hpp"

#include <algorithm>

#include "lidarfuse/errors.hpp"

namespace lidarfuse {

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

PointCloud prepare_object_sample(const PointCloud& leveled_scene, const DetectionRegion& region, double ground_z) {
  std::vector<Point3> kept;
  for (const Point3& p : leveled_scene)
    if (region.contains(p) && p.z() > ground_z) kept.push_back(p);
  if (kept.empty()) throw Error("object sample extraction is empty");

  std::vector<double> xs, ys;
  xs.reserve(kept.size());
  ys.reserve(kept.size());
  for (const Point3& p : kept) {
    xs.push_back(p.x());
    ys.push_back(p.y());
  }
  const double mx = median(std::move(xs));
  const double my = median(std::move(ys));
  for (Point3& p : kept) {
    p.x() -= mx;
    p.y() -= my;
  }
  return PointCloud(std::move(kept));
}

}  // namespace lidarfuse
