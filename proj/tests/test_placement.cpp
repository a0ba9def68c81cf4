#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lidarfuse/errors.hpp"
#include "lidarfuse/placement.hpp"
#include "support.hpp"

using namespace lidarfuse;
using namespace testing_support;
constexpr double kPi = std::numbers::pi;

namespace {

double angle_between(const Point3& a, const Point3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

BoundingBox random_leveled_box(Rng& rng) {
  const double r = uniform(rng, 2, 15), a = uniform(rng, -kPi, kPi);
  return BoundingBox::from_yaw({r * std::cos(a), r * std::sin(a), uniform(rng, 0.3, 1.0)},
                               {uniform(rng, 0.3, 2), uniform(rng, 0.3, 2), uniform(rng, 0.5, 2)}, uniform(rng, -kPi, kPi));
}

PlacementTarget random_target(Rng& rng) {
  const double r = uniform(rng, 1, 20), a = uniform(rng, -kPi, kPi);
  return PlacementTarget(r * std::cos(a), r * std::sin(a));
}

}  // namespace

TEST(Crop, InteriorAndExterior) {
  const BoundingBox unit{{0, 0, 0}, {1, 1, 1}, Matrix3::Identity()};
  EXPECT_EQ(crop_object(PointCloud({{0.4, 0, 0}}), unit).size(), 1u);
  EXPECT_EQ(crop_object(PointCloud({{0.51, 0, 0}}), unit).size(), 0u);
  EXPECT_EQ(crop_object(PointCloud({{0.5, -0.5, 0.5}}), unit).size(), 1u);
}

TEST(Crop, RotatedFaceIsClosed) {
  const BoundingBox b = BoundingBox::from_yaw({1, 2, 0}, {2, 1, 1}, kPi / 4);
  // Face center along the box x-axis at distance 1 from the center.
  const Point3 face = b.center + Point3(std::cos(kPi / 4), std::sin(kPi / 4), 0.0);
  const Point3 outside = b.center + 1.001 * Point3(std::cos(kPi / 4), std::sin(kPi / 4), 0.0);
  const PointCloud got = crop_object(PointCloud({face, outside, b.center}), b);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0], face);
  EXPECT_EQ(got[1], b.center);
}

TEST(Crop, MatchesCornerProjectionOracle) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const BoundingBox b{random_point(rng, {-3, -3, -3}, {3, 3, 3}), {1.5, 0.8, 2.0}, random_rotation(rng)};
    const PointCloud c = random_cloud(rng, 400, {-5, -5, -5}, {5, 5, 5});
    const PointCloud got = crop_object(c, b);
    PointCloud expected;
    for (const auto& p : c) {
      bool in = true;
      for (int a = 0; a < 3; ++a) in = in && std::abs((p - b.center).dot(b.rotation.col(a))) <= b.extent[a] / 2;
      if (in) expected.push_back(p);
    }
    EXPECT_EQ(got, expected);
  }
}

TEST(Placement, NoOpWhenTargetIsCurrentCenter) {
  const BoundingBox b = BoundingBox::from_yaw({5, 0, 0.8}, {1, 1, 1.6}, 0.3);
  const PointCloud obj({{5, 0, 1}, {5.2, 0.1, 0.2}});
  const PlacedObject p = place_object(obj, b, PlacementTarget(5, 0));
  EXPECT_EQ(p.motion.theta, 0.0);
  EXPECT_EQ(p.motion.translation, Point3::Zero());
  EXPECT_EQ(p.points, obj);
  EXPECT_EQ(p.box, b);
}

TEST(Placement, QuarterTurn) {
  const BoundingBox b = BoundingBox::from_yaw({5, 0, 0}, {1, 1, 1}, 0.0);
  const PlacedObject p = place_object(PointCloud({{5, 0, 1}}), b, PlacementTarget(0, 5));
  EXPECT_NEAR(p.motion.theta, kPi / 2, 1e-15);
  EXPECT_LT((p.points[0] - Point3(0, 5, 1)).norm(), 1e-12);
}

TEST(Placement, PureRadialTranslation) {
  const BoundingBox b = BoundingBox::from_yaw({5, 0, 0}, {1, 1, 1}, 0.0);
  Rng rng(4);
  const PointCloud obj = random_cloud(rng, 100, {4.5, -0.5, 0}, {5.5, 0.5, 2});
  const PlacedObject p = place_object(obj, b, PlacementTarget(10, 0));
  EXPECT_EQ(p.motion.theta, 0.0);
  for (std::size_t i = 0; i < obj.size(); ++i) {
    EXPECT_NEAR(p.points[i].x(), obj[i].x() + 5, 1e-12);
    EXPECT_EQ(p.points[i].y(), obj[i].y());
    EXPECT_EQ(p.points[i].z(), obj[i].z());
  }
}

TEST(Placement, OriginTargetRejected) {
  try {
    PlacementTarget(0, 0);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_STREQ(e.what(), "undefined placement direction");
  }
  const BoundingBox on_axis = BoundingBox::from_yaw({0, 0, 1}, {1, 1, 1}, 0);
  EXPECT_THROW(place_object(PointCloud(), on_axis, PlacementTarget(1, 0)), GeometryError);
}

TEST(Placement, CenterLandsOnTarget) {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const BoundingBox b = random_leveled_box(rng);
    const PlacementTarget target = random_target(rng);
    const BoundingBox placed = place_box(b, target);
    EXPECT_NEAR(std::remainder(azimuth(placed.center) - azimuth(target.rho()), 2 * kPi), 0.0, 1e-9);
    EXPECT_NEAR(std::hypot(placed.center.x(), placed.center.y()), target.rho().norm(), 1e-9);
    EXPECT_EQ(placed.center.z(), b.center.z());
    EXPECT_NO_THROW(placed.validate());
  }
}

TEST(Placement, RigidAndHeightPreserving) {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const BoundingBox b = random_leveled_box(rng);
    const PointCloud obj = random_cloud(rng, 40, b.center - Point3(1, 1, 1), b.center + Point3(1, 1, 1));
    const PlacedObject p = place_object(obj, b, random_target(rng));
    EXPECT_LT(max_pairwise_distance_change(obj, p.points), 1e-9);
    for (std::size_t i = 0; i < obj.size(); ++i) EXPECT_EQ(p.points[i].z(), obj[i].z());
  }
}

TEST(Placement, CompositionEqualsDirect) {
  Rng rng(7);
  for (int t = 0; t < 500; ++t) {
    const BoundingBox b = random_leveled_box(rng);
    const PointCloud obj = random_cloud(rng, 20, b.center - Point3(1, 1, 1), b.center + Point3(1, 1, 1));
    const PlacementTarget r1 = random_target(rng), r2 = random_target(rng);
    const PlacedObject first = place_object(obj, b, r1);
    const PlacedObject twice = place_object(first.points, first.box, r2);
    const PlacedObject direct = place_object(obj, b, r2);
    for (std::size_t i = 0; i < obj.size(); ++i) EXPECT_LT((twice.points[i] - direct.points[i]).norm(), 1e-9);
    EXPECT_LT((twice.box.rotation - direct.box.rotation).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Placement, HeadingRelativeToLineOfSightPreserved) {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    const BoundingBox b = random_leveled_box(rng);
    const PointCloud obj = random_cloud(rng, 30, b.center - Point3(1, 1, 1), b.center + Point3(1, 1, 1));
    const PlacedObject p = place_object(obj, b, random_target(rng));
    const Point3 los0(b.center.x(), b.center.y(), 0), los1(p.box.center.x(), p.box.center.y(), 0);
    for (std::size_t i = 0; i < obj.size(); ++i)
      EXPECT_NEAR(angle_between(los1, p.points[i] - p.box.center), angle_between(los0, obj[i] - b.center), 1e-9);
    // Box heading relative to the line of sight.
    EXPECT_NEAR(std::remainder((p.box.yaw() - azimuth(los1)) - (b.yaw() - azimuth(los0)), 2 * kPi), 0.0, 1e-9);
  }
}

TEST(Placement, RayAnglesInvariantAtEqualRange) {
  Rng rng(9);
  for (int t = 0; t < 300; ++t) {
    const BoundingBox b = random_leveled_box(rng);
    const PointCloud obj = random_cloud(rng, 30, b.center - Point3(1, 1, 1), b.center + Point3(1, 1, 1));
    const double a = uniform(rng, -kPi, kPi), r = std::hypot(b.center.x(), b.center.y());
    const PlacedObject p = place_object(obj, b, PlacementTarget(r * std::cos(a), r * std::sin(a)));
    for (std::size_t i = 0; i < obj.size(); ++i)
      EXPECT_NEAR(angle_between(p.box.center, p.points[i]), angle_between(b.center, obj[i]), 1e-9);
  }
}

TEST(Placement, FacingDiskStillFacesSensorAfterQuarterTurn) {
  // Disk of points at x = 5 facing the sensor, normal (−1, 0, 0).
  PointCloud disk;
  for (int i = 0; i < 50; ++i) {
    const double a = 2 * kPi * i / 50;
    disk.push_back({5, 0.4 * std::cos(a), 0.4 * std::sin(a)});
  }
  const BoundingBox b = BoundingBox::from_yaw({5, 0, 0}, {0.1, 1, 1}, 0);
  const PlacedObject p = place_object(disk, b, PlacementTarget(0, 5));
  const Point3 normal = p.motion.rotation * Point3(-1, 0, 0);
  for (const auto& q : p.points) EXPECT_GT(normal.dot(-q.normalized()), 0.99);
  // Naive translation keeps the old normal, which no longer points at the sensor.
  for (const auto& q : disk) {
    const Point3 naive = q + Point3(-5, 5, 0);
    EXPECT_LT(std::abs(Point3(-1, 0, 0).dot(-naive.normalized())), 0.1);
  }
}
