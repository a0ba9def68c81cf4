#include "lidarfuse/beam_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lidarfuse/angular_index.hpp"
#include "lidarfuse/errors.hpp"
#include "lidarfuse/occlusion.hpp"

namespace lidarfuse {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double BeamGrid::azimuth_step() const noexcept { return kTwoPi / static_cast<double>(azimuth_count); }

double BeamGrid::azimuth_of(std::uint32_t col) const noexcept {
  return kTwoPi * static_cast<double>(col) / static_cast<double>(azimuth_count);
}

BeamGrid beam_directions(const SensorModel& sensor) {
  sensor.validate();
  BeamGrid grid;
  grid.elevation_count = static_cast<std::uint32_t>(sensor.elevation_degrees.size());
  grid.azimuth_count = sensor.azimuth_count;
  const auto n = static_cast<std::int64_t>(sensor.azimuth_count);

  // Columns past the half turn use the equivalent negative angle so that
  // column k and column n−k are exact mirror images.
  std::vector<double> cos_az(sensor.azimuth_count);
  std::vector<double> sin_az(sensor.azimuth_count);
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t signed_k = 2 * k <= n ? k : k - n;
    const double a = kTwoPi * static_cast<double>(signed_k) / static_cast<double>(n);
    cos_az[k] = std::cos(a);
    // The half-turn column is its own mirror; sin(π) would leave a 1e-16 residue.
    sin_az[k] = 2 * k == n ? 0.0 : std::sin(a);
  }

  grid.directions.reserve(static_cast<std::size_t>(grid.elevation_count) * sensor.azimuth_count);
  for (double deg : sensor.elevation_degrees) {
    const double e = deg * kPi / 180.0;
    grid.elevations.push_back(e);
    const double ce = std::cos(e);
    const double se = std::sin(e);
    for (std::int64_t k = 0; k < n; ++k) grid.directions.emplace_back(ce * cos_az[k], ce * sin_az[k], se);
  }
  return grid;
}

std::vector<Index> candidate_beams(const BeamGrid& grid, const PointCloud& object, double margin) {
  if (object.empty()) throw GeometryError("cannot select beams for an empty object");
  std::vector<Index> out;
  if (margin >= kTwoPi) {
    out.resize(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Index>(i);
    return out;
  }

  double el_lo = std::numeric_limits<double>::infinity();
  double el_hi = -el_lo;
  for (const auto& p : object) {
    const double e = std::atan2(p.z(), std::hypot(p.x(), p.y()));
    el_lo = std::min(el_lo, e);
    el_hi = std::max(el_hi, e);
  }
  el_lo -= margin;
  el_hi += margin;
  const auto row_begin = static_cast<std::size_t>(
      std::lower_bound(grid.elevations.begin(), grid.elevations.end(), el_lo) - grid.elevations.begin());
  const auto row_end = static_cast<std::size_t>(
      std::upper_bound(grid.elevations.begin(), grid.elevations.end(), el_hi) - grid.elevations.begin());
  if (row_begin >= row_end) return out;

  const AzimuthWindow window = AzimuthWindow::around(object, margin);
  std::vector<std::uint32_t> cols;
  const double step = grid.azimuth_step();
  const auto n = static_cast<std::int64_t>(grid.azimuth_count);
  const bool full_turn = window.hi - window.lo >= kTwoPi;
  if (full_turn) {
    for (std::int64_t k = 0; k < n; ++k) cols.push_back(static_cast<std::uint32_t>(k));
  } else {
    // Enumerate the covering column range, then apply the exact closed test.
    const auto k0 = static_cast<std::int64_t>(std::floor((window.center + window.lo) / step)) - 1;
    const auto k1 = static_cast<std::int64_t>(std::ceil((window.center + window.hi) / step)) + 1;
    for (std::int64_t k = k0; k <= k1 && k - k0 < n; ++k) {
      const auto col = static_cast<std::uint32_t>(((k % n) + n) % n);
      const double rel = window.relative(grid.azimuth_of(col) > kPi ? grid.azimuth_of(col) - kTwoPi
                                                                     : grid.azimuth_of(col));
      if (rel >= window.lo && rel <= window.hi) cols.push_back(col);
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  }

  out.reserve((row_end - row_begin) * cols.size());
  for (std::size_t r = row_begin; r < row_end; ++r)
    for (std::uint32_t c : cols) out.push_back(static_cast<Index>(r * grid.azimuth_count + c));
  return out;
}

double resample_margin(const PointCloud& object, double threshold) {
  double r_min = std::numeric_limits<double>::infinity();
  double polar = 0.0;
  for (const auto& p : object) {
    r_min = std::min(r_min, range(p));
    polar = std::max(polar, std::abs(std::atan2(p.z(), std::hypot(p.x(), p.y()))));
  }
  if (!(r_min > threshold)) return kTwoPi;
  const double cap = std::asin(threshold / r_min) + 1e-9;
  if (polar + cap >= kPi / 2.0) return kTwoPi;
  // Azimuth spread of a cap of radius `cap` exceeds the cap itself away from the equator.
  return std::asin(std::min(1.0, std::sin(cap) / std::cos(polar + cap))) + 1e-9;
}

ResampledObject resample_on_beams(const PointCloud& object, const BeamGrid& grid, std::span<const Index> beams,
                                  double threshold) {
  if (!(threshold > 0.0)) throw GeometryError("resampling threshold must be positive");
  ResampledObject out;
  if (object.empty() || beams.empty()) return out;

  const RayProximityIndex index(object.points(), threshold);
  const double single_limit = 0.5 * threshold;
  for (Index beam : beams) {
    const Point3& dir = grid.directions[beam];
    // Two best hits ranked by (distance, index).
    Index best[2] = {std::numeric_limits<Index>::max(), std::numeric_limits<Index>::max()};
    RayOffset off[2];
    int hits = 0;
    index.visit(dir, [&](Index i, const RayOffset& o) {
      const auto better = [&](int slot) {
        return o.distance < off[slot].distance || (o.distance == off[slot].distance && i < best[slot]);
      };
      if (hits == 0 || better(0)) {
        best[1] = best[0];
        off[1] = off[0];
        best[0] = i;
        off[0] = o;
      } else if (hits == 1 || better(1)) {
        best[1] = i;
        off[1] = o;
      }
      ++hits;
    });
    if (hits >= 2) {
      out.points.push_back(0.5 * (off[0].along + off[1].along) * dir);
      out.beams.push_back(beam);
    } else if (hits == 1 && off[0].distance < single_limit) {
      out.points.push_back(off[0].along * dir);
      out.beams.push_back(beam);
    }
  }
  return out;
}

PointCloud resample_object(const PointCloud& object, const BeamGrid& grid, double threshold) {
  if (object.empty()) return {};
  const std::vector<Index> beams = candidate_beams(grid, object, resample_margin(object, threshold));
  return resample_on_beams(object, grid, beams, threshold).points;
}

}  // namespace lidarfuse
