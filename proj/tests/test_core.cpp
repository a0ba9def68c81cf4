#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lidarfuse/core.hpp"
#include "lidarfuse/errors.hpp"
#include "lidarfuse/kdtree.hpp"
#include "support.hpp"

using namespace lidarfuse;
using namespace testing_support;
constexpr double kPi = std::numbers::pi;

TEST(Azimuth, AxesAndQuadrants) {
  EXPECT_EQ(azimuth({1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(azimuth({0, 1, 5}), kPi / 2);
  EXPECT_NEAR(azimuth({-1, -1, 0}), -3 * kPi / 4, 1e-15);
}

TEST(Azimuth, NegativeXAxisIsPlusPi) {
  EXPECT_EQ(azimuth({-1, 0, 0}), kPi);
  EXPECT_EQ(azimuth({-1, -0.0, 0}), kPi);
}

TEST(Azimuth, UndefinedOnZAxis) {
  try {
    azimuth({0, 0, 3});
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_STREQ(e.what(), "undefined azimuth");
  }
}

TEST(Range, Examples) {
  EXPECT_EQ(range({0, 0, 0}), 0.0);
  EXPECT_EQ(range({3, 4, 0}), 5.0);
  EXPECT_EQ(range({1, 2, 2}), 3.0);
}

TEST(Mirror, FlipsYOnly) {
  const PointCloud c({{1, 2, 3}, {4, 0, -1}});
  const PointCloud m = mirror_x(c);
  EXPECT_EQ(m[0], Point3(1, -2, 3));
  EXPECT_EQ(m[1], Point3(4, 0, -1));
  EXPECT_EQ(mirror_x(m), c);
}

TEST(Mirror, PreservesRangeAndCountExactly) {
  Rng rng(11);
  const PointCloud c = random_cloud(rng, 500, {-50, -50, -5}, {50, 50, 5});
  const PointCloud m = mirror_x(c);
  ASSERT_EQ(m.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(range(m[i]), range(c[i]));
    EXPECT_EQ(azimuth(mirror_x(m[i])), azimuth(c[i]));
  }
}

TEST(Mirror, BoxStaysProperAndMatchesCorners) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    BoundingBox b{random_point(rng, {-5, -5, -5}, {5, 5, 5}), {1, 2, 3}, random_rotation(rng)};
    const BoundingBox m = mirror_x(b);
    EXPECT_NO_THROW(m.validate());
    // Every mirrored corner is a corner of the mirrored box.
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) {
          const Point3 local(0.5 * sx * b.extent.x(), 0.5 * sy * b.extent.y(), 0.5 * sz * b.extent.z());
          const Point3 corner = mirror_x(Point3(b.center + b.rotation * local));
          const Point3 in_m = m.rotation.transpose() * (corner - m.center);
          for (int a = 0; a < 3; ++a) EXPECT_NEAR(std::abs(in_m[a]), 0.5 * m.extent[a], 1e-9);
        }
  }
}

TEST(RotationZ, PreservesRange) {
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const Point3 p = random_point(rng, {-100, -100, -10}, {100, 100, 10});
    const Point3 q = rotation_z(uniform(rng, -10, 10)) * p;
    EXPECT_NEAR(range(q), range(p), 1e-12);
  }
}

TEST(BoundingBox, ValidateRejectsBadInputs) {
  EXPECT_NO_THROW(BoundingBox::from_yaw({0, 0, 0}, {1, 1, 1}, 0.3).validate());
  EXPECT_THROW((BoundingBox{{0, 0, 0}, {1, 0, 1}, Matrix3::Identity()}.validate()), GeometryError);
  Matrix3 reflect = Matrix3::Identity();
  reflect(1, 1) = -1;
  EXPECT_THROW((BoundingBox{{0, 0, 0}, {1, 1, 1}, reflect}.validate()), GeometryError);
  Matrix3 skew = Matrix3::Identity();
  skew(0, 1) = 1e-6;
  EXPECT_THROW((BoundingBox{{0, 0, 0}, {1, 1, 1}, skew}.validate()), GeometryError);
}

TEST(BoundingBox, YawRoundTrip) {
  for (double yaw : {-3.0, -1.0, 0.0, 0.5, 3.1}) EXPECT_NEAR(BoundingBox::from_yaw({}, {1, 1, 1}, yaw).yaw(), yaw, 1e-15);
}

TEST(DetectionRegion, ValidateAndContains) {
  const DetectionRegion r{0, 12, -4.625, 4.625, -1, 5};
  EXPECT_NO_THROW(r.validate());
  EXPECT_TRUE(r.contains({0, 0, 0}));
  EXPECT_TRUE(r.contains({12, 4.625, 5}));
  EXPECT_FALSE(r.contains({12.01, 0, 0}));
  EXPECT_THROW((DetectionRegion{1, 1, 0, 1, 0, 1}.validate()), GeometryError);
}

TEST(SensorModel, EvenlySpacedEndpoints) {
  const SensorModel s = SensorModel::evenly_spaced(128, -22.5, 22.5, 2048);
  ASSERT_EQ(s.elevation_degrees.size(), 128u);
  EXPECT_EQ(s.elevation_degrees.front(), -22.5);
  EXPECT_EQ(s.elevation_degrees.back(), 22.5);
  EXPECT_EQ(s.azimuth_count, 2048u);
  for (std::size_t i = 1; i < 128; ++i) EXPECT_NEAR(s.elevation_degrees[i] - s.elevation_degrees[i - 1], 45.0 / 127, 1e-12);
  EXPECT_THROW((SensorModel{{1.0, 0.0}, 10}.validate()), GeometryError);
  EXPECT_THROW((SensorModel{{0.0}, 0}.validate()), GeometryError);
}

TEST(PointCloud, SubsetFollowsRankRule) {
  const PointCloud c({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  const std::vector<Index> idx{1, 3};
  const PointCloud s = c.subset(idx);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], c[1]);
  EXPECT_EQ(s[1], c[3]);
}

TEST(Quantize, RoundsToFloat) {
  const Point3 p(0.1, 1.0 / 3.0, -7.25);
  const Point3 q = quantize(p);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(q[a], static_cast<double>(static_cast<float>(p[a])));
  EXPECT_EQ(quantize(q), q);
}

TEST(KdTree, MatchesBruteForce) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng() % 3000;
    const PointCloud c = random_cloud(rng, n, {-10, -10, -2}, {10, 10, 2});
    const KdTree tree(c);
    for (int q = 0; q < 200; ++q) {
      const Point3 p = random_point(rng, {-12, -12, -3}, {12, 12, 3});
      ASSERT_EQ(tree.nearest(p), brute_nearest(c, p));
    }
  }
}

TEST(KdTree, TiesGoToLowestIndex) {
  // Integer lattice with duplicates gives many exact ties.
  Rng rng(2);
  PointCloud c;
  for (int i = 0; i < 2000; ++i)
    c.push_back(Point3(static_cast<double>(rng() % 7), static_cast<double>(rng() % 7), static_cast<double>(rng() % 3)));
  const KdTree tree(c, 4);
  for (int x = -1; x <= 7; ++x)
    for (int y = -1; y <= 7; ++y)
      for (double z : {0.0, 0.5, 1.0, 2.5}) {
        const Point3 q(x + 0.5 * (x % 2), y, z);
        ASSERT_EQ(tree.nearest(q), brute_nearest(c, q));
      }
}
