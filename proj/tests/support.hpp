#pragma once
// Test-side generators and brute-force reference implementations. Nothing
// here calls into the library's search structures.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "lidarfuse/beam_model.hpp"
#include "lidarfuse/core.hpp"

namespace testing_support {

using lidarfuse::Index;
using lidarfuse::Point3;
using lidarfuse::PointCloud;
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Point3 random_point(Rng& rng, const Point3& lo, const Point3& hi) {
  return {uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()), uniform(rng, lo.z(), hi.z())};
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, const Point3& lo, const Point3& hi) {
  PointCloud c;
  c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.push_back(random_point(rng, lo, hi));
  return c;
}

/// Random proper rotation from a uniformly drawn unit quaternion.
inline lidarfuse::Matrix3 random_rotation(Rng& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline double max_pairwise_distance_change(const PointCloud& a, const PointCloud& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      worst = std::max(worst, std::abs((a[i] - a[j]).norm() - (b[i] - b[j]).norm()));
  return worst;
}

/// Nearest point by exhaustive scan, ties to the lowest index.
inline Index brute_nearest(const PointCloud& cloud, const Point3& q) {
  Index best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d2 = (cloud[i] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

/// Perpendicular distance of b from the ray along unit u, and its projection.
struct Offset {
  double s;
  double d;
};
inline Offset offset(const Point3& b, const Point3& u) {
  const double s = b.dot(u);
  const Point3 perp = b - s * u;
  return {s, std::sqrt(perp.x() * perp.x() + perp.y() * perp.y() + perp.z() * perp.z())};
}

/// Exhaustive O(N·M) occlusion test: target i is dropped when some occluder
/// point in front of the sensor along its ray lies closer than F to it.
inline std::vector<Index> brute_occluded(const std::vector<Point3>& target, const std::vector<Point3>& occluder,
                                         double F) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double r = target[i].norm();
    if (r == 0.0) continue;
    const Point3 u = target[i] / r;
    for (const Point3& b : occluder) {
      const Offset o = offset(b, u);
      if (o.s > 0.0 && o.d < F) {
        out.push_back(static_cast<Index>(i));
        break;
      }
    }
  }
  return out;
}

/// Beam-by-beam resampling over every object point.
inline PointCloud brute_resample(const PointCloud& object, const lidarfuse::BeamGrid& grid, double L,
                                 std::vector<Index>* beams = nullptr) {
  PointCloud out;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const Point3& u = grid.directions[a];
    int hits = 0;
    Offset best[2]{};
    for (std::size_t i = 0; i < object.size(); ++i) {
      const Offset o = offset(object[i], u);
      if (!(o.s > 0.0 && o.d < L)) continue;
      // Strict comparison keeps the earlier (lower) index on ties.
      if (hits == 0 || o.d < best[0].d) {
        best[1] = best[0];
        best[0] = o;
      } else if (hits == 1 || o.d < best[1].d) {
        best[1] = o;
      }
      ++hits;
    }
    if (hits >= 2) {
      out.push_back(0.5 * (best[0].s + best[1].s) * u);
    } else if (hits == 1 && best[0].d < L / 2.0) {
      out.push_back(best[0].s * u);
    } else {
      continue;
    }
    if (beams) beams->push_back(static_cast<Index>(a));
  }
  return out;
}

/// Object azimuth window: circular-mean frame, open interval widened by eps.
struct Window {
  double center;
  double lo;
  double hi;
  static double wrap(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
  }
  static Window of(const std::vector<Point3>& object, double eps) {
    double sx = 0.0, sy = 0.0;
    for (const auto& p : object) {
      if (p.x() == 0.0 && p.y() == 0.0) continue;
      const double a = std::atan2(p.y(), p.x());
      sx += std::cos(a);
      sy += std::sin(a);
    }
    Window w{std::atan2(sy, sx), std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : object) {
      if (p.x() == 0.0 && p.y() == 0.0) continue;
      const double rel = wrap(std::atan2(p.y(), p.x()) - w.center);
      w.lo = std::min(w.lo, rel);
      w.hi = std::max(w.hi, rel);
    }
    w.lo -= eps;
    w.hi += eps;
    return w;
  }
  bool contains(const Point3& p) const {
    if (p.x() == 0.0 && p.y() == 0.0) return false;
    if (hi - lo >= 2.0 * std::numbers::pi) return true;
    const double rel = wrap(std::atan2(p.y(), p.x()) - center);
    return lo < rel && rel < hi;
  }
};

/// One insertion done on full clouds: the literal set algebra
/// S = (B \ B_α) ∪ (B_α \ B_γ) ∪ φ(B_γ, O, F_b) ∪ φ(O, B_β, F_o),
/// laid out as surviving scene points in order, then surviving object points.
inline PointCloud monolithic_insert(const PointCloud& scene, const PointCloud& object, double F_o, double F_b,
                                    double eps) {
  const Window w = Window::of(object.points(), eps);
  double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
  for (const auto& p : object) {
    r_min = std::min(r_min, p.norm());
    r_max = std::max(r_max, p.norm());
  }
  std::vector<Point3> beta, gamma;
  std::vector<std::size_t> gamma_index;
  std::vector<char> in_alpha(scene.size(), 0);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (!w.contains(scene[i])) continue;
    in_alpha[i] = 1;
    const double r = scene[i].norm();
    if (r <= r_max) beta.push_back(scene[i]);
    if (r >= r_min) {
      gamma.push_back(scene[i]);
      gamma_index.push_back(i);
    }
  }
  std::vector<char> removed(scene.size(), 0);
  for (Index j : brute_occluded(gamma, object.points(), F_b)) removed[gamma_index[j]] = 1;
  const std::vector<Index> object_dropped = brute_occluded(object.points(), beta, F_o);

  PointCloud out;
  for (std::size_t i = 0; i < scene.size(); ++i)
    if (!removed[i]) out.push_back(scene[i]);
  std::size_t next = 0;
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (next < object_dropped.size() && object_dropped[next] == i) {
      ++next;
      continue;
    }
    out.push_back(object[i]);
  }
  return out;
}

}  // namespace testing_support
