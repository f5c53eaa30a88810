#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geompnn/mesh.hpp"

namespace geompnn {

/// Static balanced kd-tree over a 2-D point set. Queries reproduce the
/// brute-force result exactly, including (squared distance, index)
/// tie-breaking. Read-only after construction, safe for concurrent queries.
class KdTree2 {
 public:
  explicit KdTree2(std::span<const Point2> points, std::size_t leaf_size = 16);

  std::size_t size() const { return points_.size(); }

  /// Indices of the k nearest points, ordered by (squared distance, index).
  std::vector<std::size_t> knn(const Point2& query, std::size_t k) const;

  /// Indices of all points with ||p - query|| <= r, ascending.
  std::vector<std::size_t> radius(const Point2& query, double r) const;

  /// Batch k-NN over many queries; OpenMP-parallel when `parallel` is set.
  std::vector<std::vector<std::size_t>> knn_batch(std::span<const Point2> queries,
                                                  std::size_t k, bool parallel = true) const;

  std::vector<std::vector<std::size_t>> radius_batch(std::span<const Point2> queries, double r,
                                                     bool parallel = true) const;

 private:
  struct Node {
    double min_x, min_y, max_x, max_y;  // bounding box of the node's points
    std::size_t begin, end;             // range into order_
    int left = -1, right = -1;          // child node ids, -1 for leaf
  };

  int build(std::size_t begin, std::size_t end);
  void knn_recurse(int node, const Point2& q, std::size_t k,
                   std::vector<std::pair<double, std::size_t>>& heap) const;
  void radius_recurse(int node, const Point2& q, double r2,
                      std::vector<std::size_t>& out) const;
  double box_min_dist2(const Node& n, const Point2& q) const;

  std::vector<Point2> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
  int root_ = -1;
};

/// O(n^2) reference implementations, shared by tests and benchmarks.
std::vector<std::size_t> brute_force_knn(std::span<const Point2> points, const Point2& query,
                                         std::size_t k);
std::vector<std::size_t> brute_force_radius(std::span<const Point2> points, const Point2& query,
                                            double r);

}  // namespace geompnn
