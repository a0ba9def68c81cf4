#pragma once

#include <cstdint>
#include <random>

#include "lidarfuse/core.hpp"
#include "lidarfuse/placement.hpp"

namespace lidarfuse {

/// Random stream for one scene. The engine is seeded from (master seed,
/// scene index) alone, so results do not depend on which worker runs the
/// scene. Draws use fixed arithmetic instead of <random> distributions,
/// whose output differs between standard libraries.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}
  static SceneRng for_scene(std::uint64_t master_seed, std::uint64_t scene_index);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi].
  std::uint32_t between(std::uint32_t lo, std::uint32_t hi);

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of scene `scene_index`'s stream; SceneRng(scene_seed(m, k)) equals
/// SceneRng::for_scene(m, k).
std::uint64_t scene_seed(std::uint64_t master_seed, std::uint64_t scene_index) noexcept;

/// Half-width of the square that contains the box's xy footprint under any
/// rotation about z: half the footprint diagonal.
double footprint_radius(const BoundingBox& box);

/// Uniform ground target over the region shrunk by the footprint radius on
/// every side. Throws GeometryError("box larger than region") when nothing
/// is admissible. A draw landing exactly on the sensor axis is redrawn.
PlacementTarget sample_placement(SceneRng& rng, const DetectionRegion& region, const BoundingBox& box);

}  // namespace lidarfuse
