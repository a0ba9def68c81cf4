#include "lidarfuse/angular_index.hpp"

#include <algorithm>
#include <numbers>
#include <utility>

namespace lidarfuse {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
// Angular slack absorbing rounding in the cap bounds; far above double
// precision error, far below any cell size.
constexpr double kPad = 1e-9;

double elevation_of(const Point3& p) noexcept { return std::atan2(p.z(), std::hypot(p.x(), p.y())); }

}  // namespace

std::int64_t RayProximityIndex::row_of(double elevation) const noexcept {
  const auto r = static_cast<std::int64_t>(std::floor((elevation + kHalfPi) / row_size_));
  return std::clamp<std::int64_t>(r, 0, rows_ - 1);
}

std::int64_t RayProximityIndex::col_of(double azimuth) const noexcept {
  const auto c = static_cast<std::int64_t>(std::floor((azimuth + kPi) / col_size_));
  return ((c % cols_) + cols_) % cols_;
}

std::uint64_t RayProximityIndex::cell_key(const Point3& dir) const noexcept {
  const double el = elevation_of(dir);
  const double az = std::atan2(dir.y(), dir.x());
  return static_cast<std::uint64_t>(row_of(el)) * static_cast<std::uint64_t>(cols_) +
         static_cast<std::uint64_t>(col_of(az));
}

RayProximityIndex::RayProximityIndex(std::span<const Point3> points, double threshold)
    : points_(points), threshold_(threshold) {
  if (points_.empty()) return;

  std::vector<double> caps(points_.size(), -1.0);
  std::vector<double> sorted_caps;
  sorted_caps.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double r = points_[i].norm();
    if (r > threshold_) {
      caps[i] = std::asin(threshold_ / r);
      sorted_caps.push_back(caps[i]);
    }
  }

  // Cell edge tracks the typical cap so most points touch a handful of cells.
  double cell = 0.01;
  if (!sorted_caps.empty()) {
    auto mid = sorted_caps.begin() + static_cast<std::ptrdiff_t>(sorted_caps.size() / 2);
    std::nth_element(sorted_caps.begin(), mid, sorted_caps.end());
    cell = std::clamp(*mid, 2e-4, 0.05);
  }
  cols_ = static_cast<std::int64_t>(std::ceil(2.0 * kPi / cell));
  col_size_ = 2.0 * kPi / static_cast<double>(cols_);
  rows_ = static_cast<std::int64_t>(std::ceil(kPi / cell));
  row_size_ = kPi / static_cast<double>(rows_);
  const double max_cap = 16.0 * cell;

  std::vector<std::pair<std::uint64_t, Index>> entries;
  entries.reserve(points_.size() * 4);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto idx = static_cast<Index>(i);
    const Point3& p = points_[i];
    if (p.x() == 0.0 && p.y() == 0.0 && p.z() == 0.0) continue;  // never in front of any ray
    const double tau = caps[i];
    if (tau < 0.0 || tau > max_cap) {
      near_.push_back(idx);
      continue;
    }
    const double el = elevation_of(p);
    const double az = std::atan2(p.y(), p.x());
    const double reach = tau + kPad * (1.0 + tau);
    const std::int64_t r0 = row_of(el - reach);
    const std::int64_t r1 = row_of(el + reach);

    std::int64_t c0 = 0;
    std::int64_t span = cols_;
    const double polar = std::abs(el) + reach;
    if (polar < kHalfPi) {
      const double dlon = std::asin(std::min(1.0, std::sin(reach) / std::cos(polar))) + kPad;
      const auto lo = static_cast<std::int64_t>(std::floor((az - dlon + kPi) / col_size_));
      const auto hi = static_cast<std::int64_t>(std::floor((az + dlon + kPi) / col_size_));
      if (hi - lo + 1 < cols_) {
        c0 = lo;
        span = hi - lo + 1;
      }
    }
    for (std::int64_t r = r0; r <= r1; ++r) {
      const auto base = static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(cols_);
      for (std::int64_t k = 0; k < span; ++k) {
        const std::int64_t c = (((c0 + k) % cols_) + cols_) % cols_;
        entries.emplace_back(base + static_cast<std::uint64_t>(c), idx);
      }
    }
  }

  std::sort(entries.begin(), entries.end());
  keys_.reserve(entries.size());
  offsets_.reserve(entries.size() + 1);
  members_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k == 0 || entries[k].first != entries[k - 1].first) {
      keys_.push_back(entries[k].first);
      offsets_.push_back(static_cast<std::uint32_t>(k));
    }
    members_.push_back(entries[k].second);
  }
  offsets_.push_back(static_cast<std::uint32_t>(entries.size()));
}

}  // namespace lidarfuse
