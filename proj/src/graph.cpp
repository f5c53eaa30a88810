#include "geompnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "geompnn/errors.hpp"
#include "geompnn/rng.hpp"

namespace geompnn {

std::array<double, 3> edge_geometry(const Point2& y, const Point2& x) {
  double dx = y.x - x.x;
  double dy = y.y - x.y;
  return {dx, dy, std::hypot(dx, dy)};
}

NeighborGraph radius_graph(std::span<const Point2> points, double r, std::size_t M,
                           std::uint64_t seed, bool parallel) {
  if (r <= 0.0) throw data_error("radius_graph: r must be positive");
  if (M < 1) throw data_error("radius_graph: M must be >= 1");

  const std::size_t n = points.size();
  KdTree2 tree(points);
  std::vector<std::vector<std::size_t>> nbrs = tree.radius_batch(points, r, parallel);

  // Per-node capping, independent of every other node.
  auto cap_node = [&](std::size_t v) {
    std::vector<std::size_t>& nb = nbrs[v];
    nb.erase(std::remove(nb.begin(), nb.end(), v), nb.end());  // no self-loops
    if (nb.size() > M) {
      Rng rng(mix_seed(seed, hash_label("radius-cap"), v));
      std::vector<std::size_t> pick = rng.sample_without_replacement(nb.size(), M);
      std::vector<std::size_t> kept(M);
      for (std::size_t i = 0; i < M; ++i) kept[i] = nb[pick[i]];
      nb = std::move(kept);
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(n); ++v) cap_node(v);
  } else {
    for (std::size_t v = 0; v < n; ++v) cap_node(v);
  }

  NeighborGraph g;
  g.n_nodes = n;
  g.offsets.resize(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] = g.offsets[v] + nbrs[v].size();
  g.edges.resize(g.offsets[n]);
  g.edge_geom.resize(g.offsets[n]);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t o = g.offsets[v];
    for (std::size_t j = 0; j < nbrs[v].size(); ++j) {
      std::size_t y = nbrs[v][j];
      g.edges[o + j] = {y, v};
      g.edge_geom[o + j] = edge_geometry(points[y], points[v]);
    }
  }
  return g;
}

BipartiteGraph surf2vol_graph_for(std::span<const Point2> dst_points,
                                  std::span<const std::size_t> surface_point_idx,
                                  std::span<const Point2> surface_points,
                                  const KdTree2& surface_tree, std::size_t k, bool parallel) {
  if (surface_points.size() < k)
    throw data_error("surf2vol_graph: fewer surface points than k");

  BipartiteGraph g;
  g.surface_nodes.assign(surface_point_idx.begin(), surface_point_idx.end());
  g.n_dst = dst_points.size();
  g.k = k;

  std::vector<std::vector<std::size_t>> nbrs = surface_tree.knn_batch(dst_points, k, parallel);

  g.offsets.resize(g.n_dst + 1, 0);
  for (std::size_t v = 0; v < g.n_dst; ++v) g.offsets[v + 1] = g.offsets[v] + k;
  g.edges.resize(g.n_dst * k);
  g.edge_geom.resize(g.n_dst * k);
  for (std::size_t v = 0; v < g.n_dst; ++v) {
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t y_local = nbrs[v][j];
      g.edges[v * k + j] = {y_local, v};
      g.edge_geom[v * k + j] = edge_geometry(surface_points[y_local], dst_points[v]);
    }
  }
  return g;
}

BipartiteGraph surf2vol_graph(const MeshCase& c, std::size_t k, bool parallel) {
  std::vector<Point2> surf;
  surf.reserve(c.surface_idx.size());
  for (std::size_t i : c.surface_idx) surf.push_back(c.points[i]);
  if (surf.size() < k) throw data_error("surf2vol_graph: fewer surface points than k");
  KdTree2 tree(surf);
  return surf2vol_graph_for(c.points, c.surface_idx, surf, tree, k, parallel);
}

void dump_edge_list(const std::string& path, std::span<const GraphEdge> edges,
                    std::span<const std::array<double, 3>> edge_geom) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write edge list '" + path + "'");
  char buf[256];
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out << edges[e].src << " " << edges[e].dst;
    if (e < edge_geom.size()) {
      std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g", edge_geom[e][0], edge_geom[e][1],
                    edge_geom[e][2]);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace geompnn
