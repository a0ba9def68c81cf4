#include "lidarfuse/sampling.hpp"

#include <cmath>

#include "lidarfuse/errors.hpp"

namespace lidarfuse {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t scene_seed(std::uint64_t master_seed, std::uint64_t scene_index) noexcept {
  return mix64(mix64(master_seed) ^ mix64(scene_index + 0x632BE59BD9B4E019ULL));
}

SceneRng SceneRng::for_scene(std::uint64_t master_seed, std::uint64_t scene_index) {
  return SceneRng(scene_seed(master_seed, scene_index));
}

std::uint64_t SceneRng::below(std::uint64_t n) {
  if (n == 0) throw Error("SceneRng::below: empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  for (;;) {
    const std::uint64_t v = next();
    if (v < limit) return v % n;
  }
}

std::uint32_t SceneRng::between(std::uint32_t lo, std::uint32_t hi) {
  if (hi < lo) throw Error("SceneRng::between: hi < lo");
  return lo + static_cast<std::uint32_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double footprint_radius(const BoundingBox& box) { return 0.5 * std::hypot(box.extent.x(), box.extent.y()); }

PlacementTarget sample_placement(SceneRng& rng, const DetectionRegion& region, const BoundingBox& box) {
  const double r = footprint_radius(box);
  const double x_lo = region.x_min + r;
  const double x_hi = region.x_max - r;
  const double y_lo = region.y_min + r;
  const double y_hi = region.y_max - r;
  constexpr double kSlack = 1e-12;
  if (x_lo > x_hi + kSlack || y_lo > y_hi + kSlack) throw GeometryError("box larger than region");
  const auto pick = [&](double lo, double hi) {
    if (hi <= lo) return 0.5 * (lo + hi);
    return rng.uniform(lo, hi);
  };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double x = pick(x_lo, x_hi);
    const double y = pick(y_lo, y_hi);
    if (x != 0.0 || y != 0.0) return PlacementTarget(x, y);
    if (x_hi <= x_lo && y_hi <= y_lo) break;
  }
  throw GeometryError("undefined placement direction");
}

}  // namespace lidarfuse
