#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Unit direction per (elevation, azimuth) beam. Beam a = row·azimuth_count + col.
struct BeamGrid {
  std::vector<Point3> directions;
  std::vector<double> elevations;  // radians, ascending
  std::uint32_t elevation_count = 0;
  std::uint32_t azimuth_count = 0;

  std::size_t size() const noexcept { return directions.size(); }
  /// Nominal azimuth of column `col` in [0, 2π).
  double azimuth_of(std::uint32_t col) const noexcept;
  double azimuth_step() const noexcept;
};

BeamGrid beam_directions(const SensorModel& sensor);

/// Beams whose elevation and azimuth fall inside the object's angular window
/// widened by `margin` radians, in ascending beam order.
std::vector<Index> candidate_beams(const BeamGrid& grid, const PointCloud& object, double margin);

/// Angular margin guaranteeing that every beam passing within `threshold` of
/// some object point is a candidate. Returns ≥ 2π when no finite margin works.
double resample_margin(const PointCloud& object, double threshold);

/// Re-renders an object on the beam grid. For each beam, object points in
/// front of the sensor within `threshold` of the ray are ranked by distance
/// (ties to the lower index). Two or more hits emit the mean of the two
/// closest projections onto the beam; a single hit emits its projection only
/// when closer than threshold/2. Output is ordered by beam index.
PointCloud resample_object(const PointCloud& object, const BeamGrid& grid, double threshold);

/// Same as resample_object but restricted to the given beams; `beams` must be
/// ascending. Also reports which beam produced each point.
struct ResampledObject {
  PointCloud points;
  std::vector<Index> beams;
};
ResampledObject resample_on_beams(const PointCloud& object, const BeamGrid& grid, std::span<const Index> beams,
                                  double threshold);

}  // namespace lidarfuse
