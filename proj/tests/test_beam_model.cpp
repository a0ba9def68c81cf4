#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lidarfuse/beam_model.hpp"
#include "lidarfuse/errors.hpp"
#include "lidarfuse/fixtures.hpp"
#include "support.hpp"

using namespace lidarfuse;
using namespace testing_support;
constexpr double kPi = std::numbers::pi;

namespace {

BeamGrid single_beam() {
  BeamGrid g;
  g.directions = {Point3(1, 0, 0)};
  g.elevations = {0.0};
  g.elevation_count = 1;
  g.azimuth_count = 1;
  return g;
}

}  // namespace

TEST(BeamDirections, ClosedFormDirections) {
  const BeamGrid g = beam_directions(SensorModel{{0.0, 90.0}, 4});
  EXPECT_EQ(g.directions[0], Point3(1, 0, 0));
  EXPECT_LT((g.directions[4] - Point3(0, 0, 1)).norm(), 1e-12);
  EXPECT_LT((g.directions[1] - Point3(0, 1, 0)).norm(), 1e-15);
  EXPECT_LT((g.directions[3] - Point3(0, -1, 0)).norm(), 1e-15);
}

TEST(BeamDirections, OrchardGridSizeAndUnitLength) {
  const BeamGrid g = beam_directions(SensorModel::evenly_spaced(128, -22.5, 22.5, 2048));
  ASSERT_EQ(g.size(), 262144u);
  EXPECT_EQ(g.elevation_count, 128u);
  EXPECT_EQ(g.azimuth_count, 2048u);
  for (const auto& d : g.directions) ASSERT_NEAR(d.norm(), 1.0, 1e-12);
}

TEST(BeamDirections, MirroredColumnsAreExact) {
  for (std::uint32_t n : {2048u, 2083u}) {
    const BeamGrid g = beam_directions(SensorModel::evenly_spaced(4, -20, 5, n));
    for (std::uint32_t r = 0; r < 4; ++r)
      for (std::uint32_t k = 1; k < n; ++k) {
        const Point3& a = g.directions[r * n + k];
        const Point3& b = g.directions[r * n + (n - k)];
        ASSERT_EQ(mirror_x(a), b);
      }
  }
}

TEST(CandidateBeams, NarrowObjectExcludesSideBeams) {
  const BeamGrid g = beam_directions(SensorModel::evenly_spaced(16, -15, 15, 360));
  PointCloud obj;
  for (double a : {-2.0, 0.0, 2.0}) obj.push_back({10 * std::cos(a * kPi / 180), 10 * std::sin(a * kPi / 180), 0});
  // Rows sit at odd degrees, so the margin must reach the ±1° rows.
  EXPECT_TRUE(candidate_beams(g, obj, 0.5 * kPi / 180).empty());
  const auto beams = candidate_beams(g, obj, 1.5 * kPi / 180);
  EXPECT_EQ(beams.size(), 2u * 7u);
  for (Index b : beams) {
    const double az = std::abs(std::atan2(g.directions[b].y(), g.directions[b].x()));
    EXPECT_LE(az, 3.5 * kPi / 180);
  }
  EXPECT_EQ(candidate_beams(g, obj, 2 * kPi).size(), g.size());
}

TEST(CandidateBeams, SphereCandidatesGiveFullGridOutput) {
  const SensorModel sensor = SensorModel::evenly_spaced(64, -22.5, 22.5, 1024);
  const BeamGrid g = beam_directions(sensor);
  for (double r : {3.0, 10.0, 25.0}) {
    const auto sphere = fixtures::make_fixture(fixtures::Sphere{{r, 1.0, 0.5}, 0.6}, sensor);
    ASSERT_FALSE(sphere.cloud.empty());
    const double L = 0.04;
    const auto cands = candidate_beams(g, sphere.cloud, resample_margin(sphere.cloud, L));
    EXPECT_LT(cands.size(), g.size());
    const PointCloud restricted = resample_on_beams(sphere.cloud, g, cands, L).points;
    EXPECT_EQ(restricted, brute_resample(sphere.cloud, g, L));
  }
}

TEST(CandidateBeams, WindowAcrossSeam) {
  const SensorModel sensor = SensorModel::evenly_spaced(16, -15, 15, 512);
  const BeamGrid g = beam_directions(sensor);
  const auto sphere = fixtures::make_fixture(fixtures::Sphere{{-8, 0.0, 0.0}, 0.7}, sensor);
  const PointCloud got = resample_object(sphere.cloud, g, 0.04);
  EXPECT_FALSE(got.empty());
  EXPECT_EQ(got, brute_resample(sphere.cloud, g, 0.04));
}

TEST(Resample, NoPointNearAnyBeam) {
  EXPECT_TRUE(resample_object(PointCloud({{10, 1, 0}}), single_beam(), 0.04).empty());
}

TEST(Resample, TwoHitsAverageProjections) {
  const PointCloud got = resample_object(PointCloud({{10, 0.01, 0}, {10, -0.01, 0}}), single_beam(), 0.04);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], Point3(10, 0, 0));
}

TEST(Resample, TwoClosestOfThree) {
  const PointCloud got =
      resample_object(PointCloud({{12, 0.03, 0}, {10, 0.01, 0}, {11, 0.0, 0.015}}), single_beam(), 0.04);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], Point3(10.5, 0, 0));
}

TEST(Resample, TiesPreferLowerIndex) {
  // Offsets are powers of two so both runners-up are exactly 2^-6 from the beam.
  const double a = 0.015625, b = 0.00390625;
  const PointCloud got = resample_object(PointCloud({{13, a, 0}, {10, b, 0}, {9, a, 0}}), single_beam(), 0.04);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], Point3(11.5, 0, 0));
}

TEST(Resample, SinglePointHalfThresholdRule) {
  EXPECT_TRUE(resample_object(PointCloud({{10, 0.03, 0}}), single_beam(), 0.04).empty());
  const PointCloud got = resample_object(PointCloud({{10, 0.01, 0}}), single_beam(), 0.04);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], Point3(10, 0, 0));
  EXPECT_TRUE(resample_object(PointCloud({{10, 0.02, 0}}), single_beam(), 0.04).empty());
}

TEST(Resample, PointsBehindSensorIgnored) {
  EXPECT_TRUE(resample_object(PointCloud({{-10, 0.0, 0}, {-9, 0.0, 0}}), single_beam(), 0.04).empty());
}

TEST(Resample, RejectsNonPositiveThreshold) {
  EXPECT_THROW(resample_object(PointCloud({{10, 0, 0}}), single_beam(), 0.0), GeometryError);
}

TEST(Resample, MatchesBruteForceOnRandomObjects) {
  Rng rng(1);
  const BeamGrid g = beam_directions(SensorModel::evenly_spaced(32, -20, 20, 512));
  for (int t = 0; t < 25; ++t) {
    const double a = uniform(rng, -kPi, kPi), r = uniform(rng, 0.5, 25);
    const Point3 c(r * std::cos(a), r * std::sin(a), uniform(rng, -1.5, 1.0));
    PointCloud obj = random_cloud(rng, 50 + rng() % 700, c - Point3(0.5, 0.5, 0.8), c + Point3(0.5, 0.5, 0.8));
    const double L = uniform(rng, 0.02, 0.12);
    std::vector<Index> beams;
    const PointCloud expected = brute_resample(obj, g, L, &beams);
    const ResampledObject full = resample_on_beams(obj, g, std::vector<Index>(beams.begin(), beams.end()), L);
    EXPECT_EQ(resample_object(obj, g, L), expected);
    EXPECT_EQ(full.beams, beams);
    for (std::size_t i = 0; i < expected.size(); ++i)
      EXPECT_LT(expected[i].cross(g.directions[beams[i]]).norm(), 1e-9);
    for (std::size_t i = 1; i < beams.size(); ++i) EXPECT_LT(beams[i - 1], beams[i]);
  }
}

TEST(Resample, EmittedRangeBetweenContributors) {
  Rng rng(2);
  const BeamGrid g = beam_directions(SensorModel::evenly_spaced(32, -20, 20, 512));
  const PointCloud obj = random_cloud(rng, 2000, {7, -1, -1}, {9, 1, 1});
  double lo = 1e9, hi = 0;
  for (const auto& p : obj) lo = std::min(lo, p.norm()), hi = std::max(hi, p.norm());
  for (const auto& p : resample_object(obj, g, 0.04)) {
    EXPECT_GE(p.norm(), lo - 0.04);
    EXPECT_LE(p.norm(), hi);
  }
}

TEST(Resample, FartherSphereGetsFewerPoints) {
  const SensorModel sensor = SensorModel::evenly_spaced(128, -22.5, 22.5, 2048);
  const BeamGrid g = beam_directions(sensor);
  // Dense surface samples of a sphere placed at 5 m and at 10 m.
  const auto surface = [](const Point3& c) {
    PointCloud s;
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 400; ++j) {
        const double th = kPi * (i + 0.5) / 200, ph = 2 * kPi * j / 400;
        s.push_back(c + 0.5 * Point3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)));
      }
    return s;
  };
  const std::size_t near = resample_object(surface({5, 0, 0}), g, 0.04).size();
  const std::size_t far = resample_object(surface({10, 0, 0}), g, 0.04).size();
  EXPECT_GT(near, far);
  EXPECT_GT(far, 0u);
}
