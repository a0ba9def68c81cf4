#include "lidarfuse/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "lidarfuse/errors.hpp"

namespace lidarfuse {
namespace {

using Vec2 = Eigen::Vector2d;

std::vector<Vec2> footprint_hull(const BoundingBox& box) {
  std::vector<Vec2> pts;
  pts.reserve(8);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) {
        const Point3 local(0.5 * sx * box.extent.x(), 0.5 * sy * box.extent.y(), 0.5 * sz * box.extent.z());
        const Point3 w = box.center + box.rotation * local;
        pts.emplace_back(w.x(), w.y());
      }
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  const auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  return hull;
}

bool separated_along_edges(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec2 edge = a[(i + 1) % a.size()] - a[i];
    const Vec2 axis(-edge.y(), edge.x());
    double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo;
    double b_lo = a_lo, b_hi = a_hi;
    for (const auto& p : a) {
      a_lo = std::min(a_lo, axis.dot(p));
      a_hi = std::max(a_hi, axis.dot(p));
    }
    for (const auto& p : b) {
      b_lo = std::min(b_lo, axis.dot(p));
      b_hi = std::max(b_hi, axis.dot(p));
    }
    if (a_hi < b_lo || b_hi < a_lo) return true;
  }
  return false;
}

}  // namespace

PreparedBackground PreparedBackground::prepare(std::string id, PointCloud cloud, const LevelingParams& params) {
  PreparedBackground bg;
  bg.id = std::move(id);
  try {
    bg.transform = estimate_level_transform(cloud, params);
  } catch (const Error& e) {
    throw CompositionError(Stage::kLevelBackground, e.what());
  }
  bg.polar = PolarCache::of(cloud);
  bg.cloud = std::move(cloud);
  return bg;
}

PreparedObject PreparedObject::prepare(std::string id, const PointCloud& scene, const BoundingBox& box,
                                       const LevelingParams& params) {
  LevelTransform t;
  try {
    box.validate();
    t = estimate_level_transform(scene, params);
  } catch (const Error& e) {
    throw CompositionError(Stage::kLevelObject, e.what());
  }
  PreparedObject obj;
  obj.id = std::move(id);
  obj.box = level(box, t);
  obj.points = crop_object(level(scene, t), obj.box);
  if (obj.points.empty()) throw CompositionError(Stage::kCrop, "object box contains no points");
  return obj;
}

ObjectInsertion render_insertion(const PreparedObject& object, const PlacementTarget& target,
                                 const PreparedBackground& background, const CompositionParams& params) {
  if (!params.beams) throw CompositionError(Stage::kResample, "no beam grid configured");
  PlacedObject placed;
  try {
    placed = place_object(object.points, object.box, target);
  } catch (const GeometryError& e) {
    throw CompositionError(Stage::kPlacement, e.what());
  }
  const BoundingBox sensor_box = unlevel(placed.box, background.transform);
  const auto yaw = static_cast<float>(sensor_box.yaw());
  BoundingBox box = BoundingBox::from_yaw(quantize(sensor_box.center), quantize(sensor_box.extent), yaw);
  if (!params.region.contains(box.center))
    throw CompositionError(Stage::kPlacement, "box center outside detection region");

  PointCloud resampled =
      quantize(resample_object(unlevel(placed.points, background.transform), *params.beams, params.beam_threshold));
  if (resampled.empty()) throw CompositionError(Stage::kResample, "object intersects no beam");

  return ObjectInsertion{object.id, target, std::move(resampled), box, placed.box};
}

void ComposedScene::validate() const {
  for (std::size_t i = 0; i < background_dropped.size(); ++i) {
    if (background_dropped[i] >= background_point_count)
      throw FormatError("dropped index " + std::to_string(background_dropped[i]) + " out of range");
    if (i > 0 && background_dropped[i - 1] >= background_dropped[i])
      throw FormatError("dropped indices must be strictly increasing");
  }
  for (const auto& b : boxes)
    if (!region.contains(b.center)) throw FormatError("box center outside detection region");
  if (!all_finite(object_points)) throw FormatError("non-finite object point");
}

PointCloud expand(const ComposedScene& scene, const PointCloud& background) {
  if (background.size() != scene.background_point_count)
    throw FormatError("background has " + std::to_string(background.size()) + " points, scene expects " +
                      std::to_string(scene.background_point_count));
  std::vector<Point3> out;
  out.reserve(background.size() - scene.background_dropped.size() + scene.object_points.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < background.size(); ++i) {
    if (next < scene.background_dropped.size() && scene.background_dropped[next] == i) {
      ++next;
      continue;
    }
    out.push_back(background[i]);
  }
  out.insert(out.end(), scene.object_points.begin(), scene.object_points.end());
  return PointCloud(std::move(out));
}

SceneComposer::SceneComposer(const PreparedBackground& background, const CompositionParams& params,
                             std::uint64_t seed)
    : background_(background), params_(params), seed_(seed), background_dropped_(background.cloud.size(), 0) {}

void SceneComposer::insert(const ObjectInsertion& insertion) {
  for (const auto& placed : leveled_boxes_)
    if (footprints_overlap(placed, insertion.leveled_box))
      throw CompositionError(Stage::kPlacement, "box overlaps a previously placed object");
  const PointCloud& object = insertion.points;
  if (object.empty()) throw CompositionError(Stage::kResample, "object intersects no beam");

  AzimuthWindow window;
  try {
    window = AzimuthWindow::around(object, params_.epsilon);
  } catch (const GeometryError& e) {
    throw CompositionError(Stage::kOcclusion, e.what());
  }
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0.0;
  for (const auto& p : object) {
    r_min = std::min(r_min, range(p));
    r_max = std::max(r_max, range(p));
  }

  // Composite index space: background indices first, then committed object points.
  const auto base = static_cast<Index>(background_.cloud.size());
  std::vector<Index> gamma;
  std::vector<Point3> near_points;
  std::vector<Point3> far_points;
  const auto classify = [&](Index composite, const Point3& p, double az, double r) {
    if (std::isnan(az) || !window.contains(az)) return;
    if (r <= r_max) near_points.push_back(p);
    if (r >= r_min) {
      gamma.push_back(composite);
      far_points.push_back(p);
    }
  };
  for (Index i = 0; i < base; ++i)
    if (!background_dropped_[i]) classify(i, background_.cloud[i], background_.polar.azimuth[i], background_.polar.range[i]);
  for (std::size_t k = 0; k < object_points_.size(); ++k) {
    if (!object_alive_[k]) continue;
    const Point3& p = object_points_[k];
    const double az = (p.x() == 0.0 && p.y() == 0.0) ? std::numeric_limits<double>::quiet_NaN() : azimuth(p);
    classify(base + static_cast<Index>(k), p, az, range(p));
  }

  const std::vector<Index> object_dropped =
      occluded_indices(object.points(), near_points, params_.object_threshold);
  const std::vector<Index> far_dropped = occluded_indices(far_points, object.points(), params_.background_threshold);

  const std::size_t visible = object.size() - object_dropped.size();
  if (visible < params_.min_visible_points)
    throw CompositionError(Stage::kOcclusion, "only " + std::to_string(visible) + " object points remain visible");

  for (Index j : far_dropped) {
    const Index c = gamma[j];
    if (c < base)
      background_dropped_[c] = 1;
    else
      object_alive_[c - base] = 0;
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (next < object_dropped.size() && object_dropped[next] == i) {
      ++next;
      continue;
    }
    object_points_.push_back(object[i]);
    object_alive_.push_back(1);
  }
  boxes_.push_back(insertion.box);
  leveled_boxes_.push_back(insertion.leveled_box);
  provenance_.push_back(ObjectProvenance{insertion.object_id, insertion.target});
}

ComposedScene SceneComposer::finish() const {
  ComposedScene s;
  s.background_id = background_.id;
  s.background_point_count = static_cast<std::uint32_t>(background_.cloud.size());
  for (std::size_t k = 0; k < object_points_.size(); ++k)
    if (object_alive_[k]) s.object_points.push_back(object_points_[k]);
  for (std::size_t i = 0; i < background_dropped_.size(); ++i)
    if (background_dropped_[i]) s.background_dropped.push_back(static_cast<Index>(i));
  s.boxes = boxes_;
  s.region = params_.region;
  for (double* v : {&s.region.x_min, &s.region.x_max, &s.region.y_min, &s.region.y_max, &s.region.z_min, &s.region.z_max})
    *v = static_cast<double>(static_cast<float>(*v));
  s.sensor_preset = params_.sensor_preset;
  s.seed = seed_;
  s.objects = provenance_;
  return s;
}

ComposedScene compose_single(const PreparedBackground& background, const PreparedObject& object,
                             const PlacementTarget& target, const CompositionParams& params, std::uint64_t seed) {
  SceneComposer composer(background, params, seed);
  composer.insert(render_insertion(object, target, background, params));
  return composer.finish();
}

ComposedScene compose_single(const std::string& background_id, const PointCloud& background,
                             const std::string& object_id, const PointCloud& object_scene,
                             const BoundingBox& object_box, const PlacementTarget& target,
                             const CompositionParams& params, std::uint64_t seed) {
  const PreparedBackground bg = PreparedBackground::prepare(background_id, background, params.background_leveling);
  const PreparedObject obj = PreparedObject::prepare(object_id, object_scene, object_box, params.object_leveling);
  return compose_single(bg, obj, target, params, seed);
}

MultiComposition compose_multi(const PreparedBackground& background, const std::vector<const PreparedObject*>& objects,
                               const std::vector<PlacementTarget>& targets, const CompositionParams& params,
                               std::uint64_t seed) {
  if (objects.size() != targets.size()) throw Error("compose_multi: objects and targets differ in length");
  if (objects.size() > params.max_objects)
    throw Error("compose_multi: " + std::to_string(objects.size()) + " objects exceed the maximum of " +
                std::to_string(params.max_objects));
  if (objects.empty() && params.strict) throw CompositionError(Stage::kPlacement, "nothing to compose");

  std::vector<std::size_t> order(objects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return targets[a].rho().norm() < targets[b].rho().norm();
  });

  MultiComposition out;
  SceneComposer composer(background, params, seed);
  for (std::size_t k : order) {
    try {
      composer.insert(render_insertion(*objects[k], targets[k], background, params));
    } catch (const Error& e) {
      if (params.strict) throw;
      out.skipped.push_back(SkippedObject{objects[k]->id, e.what()});
    }
  }
  out.scene = composer.finish();
  return out;
}

bool footprints_overlap(const BoundingBox& a, const BoundingBox& b) {
  const auto ha = footprint_hull(a);
  const auto hb = footprint_hull(b);
  return !separated_along_edges(ha, hb) && !separated_along_edges(hb, ha);
}

std::size_t CenterGrid::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

CenterGrid rasterize_centers(const std::vector<BoundingBox>& boxes, const DetectionRegion& region,
                             std::uint32_t rows, std::uint32_t cols) {
  if (rows == 0 || cols == 0) throw GeometryError("center grid needs positive dimensions");
  region.validate();
  CenterGrid grid{rows, cols, region, std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * cols, 0)};
  const double x_span = region.x_max - region.x_min;
  const double y_span = region.y_max - region.y_min;
  for (const auto& b : boxes) {
    const double x = b.center.x();
    const double y = b.center.y();
    if (!(x >= region.x_min && x < region.x_max && y >= region.y_min && y < region.y_max))
      throw GeometryError("label out of detection region");
    const auto r = std::min<std::uint32_t>(static_cast<std::uint32_t>((x - region.x_min) * rows / x_span), rows - 1);
    const auto c = std::min<std::uint32_t>(static_cast<std::uint32_t>((y - region.y_min) * cols / y_span), cols - 1);
    grid.cells[static_cast<std::size_t>(r) * cols + c] = 1;
  }
  return grid;
}

}  // namespace lidarfuse
