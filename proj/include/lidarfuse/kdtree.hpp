#pragma once

#include <cstdint>
#include <vector>

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Static 3D k-d tree answering exact nearest-neighbor queries. Ties in
/// distance resolve to the lowest point index, so results are identical to
/// an all-pairs scan.
class KdTree {
 public:
  explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = 16);

  /// Index into the cloud the tree was built from. The tree must be non-empty.
  Index nearest(const Point3& query) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    // Leaf when `axis` < 0; then [begin, end) spans `order_`.
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Point3& q, double& best_d2, Index& best) const;

  std::vector<Point3> points_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace lidarfuse
