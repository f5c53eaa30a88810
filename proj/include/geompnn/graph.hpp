#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geompnn/kdtree.hpp"
#include "geompnn/mesh.hpp"

namespace geompnn {

/// [y - x, ||y - x||] for the directed edge y -> x.
std::array<double, 3> edge_geometry(const Point2& y, const Point2& x);

struct GraphEdge {
  std::size_t src;
  std::size_t dst;
};

/// Directed graph over one node set. Edges are grouped by destination
/// (ascending), sources ascending within a group; `offsets` is the CSR index
/// of that grouping (edges of node v live in [offsets[v], offsets[v+1])).
struct NeighborGraph {
  std::size_t n_nodes = 0;
  std::vector<GraphEdge> edges;
  std::vector<std::size_t> offsets;
  std::vector<std::array<double, 3>> edge_geom;  // e_base(src, dst) per edge

  std::size_t in_degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
};

/// Directed bipartite surface -> volume graph. Edge sources are local surface
/// indices (row in `surface_nodes`), destinations are point indices of the
/// case the graph was built for. Every destination has in-degree exactly k;
/// edges grouped by destination, sources ordered by (distance, index).
struct BipartiteGraph {
  std::vector<std::size_t> surface_nodes;  // local surface row -> point index
  std::size_t n_dst = 0;
  std::size_t k = 0;
  std::vector<GraphEdge> edges;
  std::vector<std::size_t> offsets;
  std::vector<std::array<double, 3>> edge_geom;  // e_base(y, x) per edge
};

/// Radius graph with neighbor cap M: neighborhoods are all points within r
/// (self excluded); when a node has more than M in-radius neighbors, exactly
/// M are kept by uniform sampling without replacement seeded by
/// (seed, node index).
NeighborGraph radius_graph(std::span<const Point2> points, double r, std::size_t M,
                           std::uint64_t seed, bool parallel = true);

/// k nearest surface points for every point of the case (surface points
/// included as destinations). Ties at equal distance break by ascending
/// point index. Throws data_error when |surface| < k.
BipartiteGraph surf2vol_graph(const MeshCase& c, std::size_t k, bool parallel = true);

/// Same, but for an explicit destination list (used when the volume side is
/// a subsample); `surface_tree` must be built over `surface_points`.
BipartiteGraph surf2vol_graph_for(std::span<const Point2> dst_points,
                                  std::span<const std::size_t> surface_point_idx,
                                  std::span<const Point2> surface_points,
                                  const KdTree2& surface_tree, std::size_t k,
                                  bool parallel = true);

/// Debug dump: one line per edge, `src dst f1 f2 ...`.
void dump_edge_list(const std::string& path, std::span<const GraphEdge> edges,
                    std::span<const std::array<double, 3>> edge_geom);

}  // namespace geompnn
