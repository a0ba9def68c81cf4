#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Perpendicular distance from `p` to the ray s·u, s > 0, for unit `u`, and
/// the projection scalar s = p·u. Shared by occlusion and beam resampling.
struct RayOffset {
  double along = 0.0;
  double distance = 0.0;
};

inline RayOffset ray_offset(const Point3& p, const Point3& unit_dir) noexcept {
  // The residual vector avoids the cancellation in |p|² − s² at long range.
  const double s = p.dot(unit_dir);
  return {s, (p - s * unit_dir).norm()};
}

/// Indexes a point set by viewing direction so that, for any query ray from
/// the origin, only points that can lie within `threshold` of the ray are
/// examined. Each point is splatted into every (elevation, azimuth) cell its
/// angular cap asin(threshold / range) touches; points too close to the
/// sensor for a useful cap are kept in a list checked by every query.
///
/// The index views `points`; they must outlive it.
///
/// Visiting is exact: `visit` reports precisely the points with p·u > 0 and
/// distance < threshold, the same set an all-pairs scan would produce.
class RayProximityIndex {
 public:
  RayProximityIndex(std::span<const Point3> points, double threshold);

  /// Calls fn(index, RayOffset) for every point within `threshold` of the ray
  /// along unit vector `unit_dir`. Points are visited cell-list first, then
  /// the near list; callers needing an order must impose it.
  template <class Fn>
  void visit(const Point3& unit_dir, Fn&& fn) const {
    if (points_.empty()) return;
    const auto check = [&](Index i) {
      const RayOffset off = ray_offset(points_[i], unit_dir);
      if (off.along > 0.0 && off.distance < threshold_) fn(i, off);
    };
    const std::uint64_t key = cell_key(unit_dir);
    const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it != keys_.end() && *it == key) {
      const auto slot = static_cast<std::size_t>(it - keys_.begin());
      for (std::uint32_t k = offsets_[slot]; k < offsets_[slot + 1]; ++k) check(members_[k]);
    }
    for (Index i : near_) check(i);
  }

  double threshold() const noexcept { return threshold_; }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  std::uint64_t cell_key(const Point3& dir) const noexcept;
  std::int64_t row_of(double elevation) const noexcept;
  std::int64_t col_of(double azimuth) const noexcept;

  std::span<const Point3> points_;
  double threshold_;
  double row_size_ = 0.0;
  double col_size_ = 0.0;
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> offsets_;
  std::vector<Index> members_;
  std::vector<Index> near_;
};

}  // namespace lidarfuse
