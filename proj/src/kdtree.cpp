#include "lidarfuse/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lidarfuse/errors.hpp"

namespace lidarfuse {

KdTree::KdTree(const PointCloud& cloud, std::size_t leaf_size)
    : points_(cloud.points()), order_(cloud.size()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  std::iota(order_.begin(), order_.end(), Index{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{-1, 0.0, begin, end, 0, 0});
  if (end - begin <= leaf_size_) return id;

  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];

  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::uint32_t node_id, const Point3& q, double& best_d2, Index& best) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Index idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds >= split.
  const double diff = q[node.axis] - node.split;
  const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
  const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
  search(near, q, best_d2, best);
  // Equality still descends so that equal-distance lower indices are found.
  if (diff * diff <= best_d2) search(far, q, best_d2, best);
}

Index KdTree::nearest(const Point3& query) const {
  if (points_.empty()) throw GeometryError("nearest-neighbor query on empty index");
  double best_d2 = std::numeric_limits<double>::infinity();
  Index best = std::numeric_limits<Index>::max();
  search(0, query, best_d2, best);
  return best;
}

}  // namespace lidarfuse
