#include "geompnn/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geompnn/errors.hpp"

namespace geompnn {

namespace {

inline double dist2(const Point2& a, const Point2& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

using Cand = std::pair<double, std::size_t>;  // (squared distance, index)

}  // namespace

KdTree2::KdTree2(std::span<const Point2> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (points_.empty()) throw data_error("KdTree2: empty point set");
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
  root_ = build(0, points_.size());
}

int KdTree2::build(std::size_t begin, std::size_t end) {
  Node n;
  n.begin = begin;
  n.end = end;
  n.min_x = n.min_y = std::numeric_limits<double>::infinity();
  n.max_x = n.max_y = -std::numeric_limits<double>::infinity();
  for (std::size_t i = begin; i < end; ++i) {
    const Point2& p = points_[order_[i]];
    n.min_x = std::min(n.min_x, p.x);
    n.max_x = std::max(n.max_x, p.x);
    n.min_y = std::min(n.min_y, p.y);
    n.max_y = std::max(n.max_y, p.y);
  }
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(n);

  if (end - begin > leaf_size_) {
    bool split_x = (n.max_x - n.min_x) >= (n.max_y - n.min_y);
    std::size_t mid = begin + (end - begin) / 2;
    auto cmp = [&](std::size_t a, std::size_t b) {
      const Point2& pa = points_[a];
      const Point2& pb = points_[b];
      double ka = split_x ? pa.x : pa.y;
      double kb = split_x ? pb.x : pb.y;
      if (ka != kb) return ka < kb;
      return a < b;
    };
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, cmp);
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
  }
  return id;
}

double KdTree2::box_min_dist2(const Node& n, const Point2& q) const {
  double dx = 0.0, dy = 0.0;
  if (q.x < n.min_x)
    dx = n.min_x - q.x;
  else if (q.x > n.max_x)
    dx = q.x - n.max_x;
  if (q.y < n.min_y)
    dy = n.min_y - q.y;
  else if (q.y > n.max_y)
    dy = q.y - n.max_y;
  return dx * dx + dy * dy;
}

void KdTree2::knn_recurse(int node_id, const Point2& q, std::size_t k,
                          std::vector<Cand>& heap) const {
  const Node& n = nodes_[node_id];
  // Prune only on strictly greater distance: an equal-distance point with a
  // smaller index may still displace the current worst candidate.
  if (heap.size() == k && box_min_dist2(n, q) > heap.front().first) return;

  if (n.left < 0) {
    for (std::size_t i = n.begin; i < n.end; ++i) {
      std::size_t idx = order_[i];
      Cand c{dist2(points_[idx], q), idx};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end());
      } else if (c < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }

  double dl = box_min_dist2(nodes_[n.left], q);
  double dr = box_min_dist2(nodes_[n.right], q);
  int first = n.left, second = n.right;
  if (dr < dl) {
    std::swap(first, second);
  }
  knn_recurse(first, q, k, heap);
  knn_recurse(second, q, k, heap);
}

std::vector<std::size_t> KdTree2::knn(const Point2& q, std::size_t k) const {
  k = std::min(k, points_.size());
  std::vector<Cand> heap;
  heap.reserve(k + 1);
  knn_recurse(root_, q, k, heap);
  std::sort(heap.begin(), heap.end());
  std::vector<std::size_t> out(heap.size());
  for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
  return out;
}

void KdTree2::radius_recurse(int node_id, const Point2& q, double r2,
                             std::vector<std::size_t>& out) const {
  const Node& n = nodes_[node_id];
  if (box_min_dist2(n, q) > r2) return;
  if (n.left < 0) {
    for (std::size_t i = n.begin; i < n.end; ++i) {
      std::size_t idx = order_[i];
      if (dist2(points_[idx], q) <= r2) out.push_back(idx);
    }
    return;
  }
  radius_recurse(n.left, q, r2, out);
  radius_recurse(n.right, q, r2, out);
}

std::vector<std::size_t> KdTree2::radius(const Point2& q, double r) const {
  std::vector<std::size_t> out;
  radius_recurse(root_, q, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::size_t>> KdTree2::knn_batch(std::span<const Point2> queries,
                                                         std::size_t k, bool parallel) const {
  std::vector<std::vector<std::size_t>> out(queries.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.size()); ++i)
      out[i] = knn(queries[i], k);
  } else {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = knn(queries[i], k);
  }
  return out;
}

std::vector<std::vector<std::size_t>> KdTree2::radius_batch(std::span<const Point2> queries,
                                                            double r, bool parallel) const {
  std::vector<std::vector<std::size_t>> out(queries.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.size()); ++i)
      out[i] = radius(queries[i], r);
  } else {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = radius(queries[i], r);
  }
  return out;
}

std::vector<std::size_t> brute_force_knn(std::span<const Point2> points, const Point2& query,
                                         std::size_t k) {
  std::vector<Cand> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) all[i] = {dist2(points[i], query), i};
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + k, all.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = all[i].second;
  return out;
}

std::vector<std::size_t> brute_force_radius(std::span<const Point2> points, const Point2& query,
                                            double r) {
  std::vector<std::size_t> out;
  double r2 = r * r;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (dist2(points[i], query) <= r2) out.push_back(i);
  return out;
}

}  // namespace geompnn
