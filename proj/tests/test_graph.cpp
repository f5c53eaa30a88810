#include <cmath>
#include <set>

#include "doctest.h"
#include "geompnn/errors.hpp"
#include "geompnn/graph.hpp"
#include "geompnn/mesh.hpp"
#include "geompnn/rng.hpp"

using geompnn::BipartiteGraph;
using geompnn::MeshCase;
using geompnn::NeighborGraph;
using geompnn::Point2;

namespace {

MeshCase ring_case(std::size_t n_surface, std::size_t n_volume, std::uint64_t seed) {
  MeshCase c;
  c.case_id = "ring";
  geompnn::Rng rng(seed);
  for (std::size_t i = 0; i < n_surface; ++i) {
    const double th = 2.0 * M_PI * double(i) / double(n_surface);
    c.points.push_back({0.2 * std::cos(th), 0.2 * std::sin(th)});
    c.surface_idx.push_back(i);
    c.normals.push_back({std::cos(th), std::sin(th)});
    c.wall_distance.push_back(0.0);
  }
  for (std::size_t i = 0; i < n_volume; ++i) {
    const double r = rng.uniform(0.3, 1.5);
    const double th = rng.uniform(0.0, 2.0 * M_PI);
    c.points.push_back({r * std::cos(th), r * std::sin(th)});
    c.normals.push_back({0.0, 0.0});
    c.wall_distance.push_back(r - 0.2);
  }
  return c;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("edge_geometry is [y - x, distance]") {
    const auto zero = geompnn::edge_geometry({0.4, -0.2}, {0.4, -0.2});
    CHECK(zero == std::array<double, 3>{0.0, 0.0, 0.0});
    const auto e = geompnn::edge_geometry({4.0, 5.0}, {1.0, 1.0});
    CHECK(e == std::array<double, 3>{3.0, 4.0, 5.0});
    const auto back = geompnn::edge_geometry({1.0, 1.0}, {4.0, 5.0});
    CHECK(back[0] == -e[0]);
    CHECK(back[1] == -e[1]);
    CHECK(back[2] == e[2]);
  }

  TEST_CASE("radius graph of three collinear points") {
    const std::vector<Point2> pts{{0.0, 0.0}, {0.04, 0.0}, {0.08, 0.0}};
    const NeighborGraph g = geompnn::radius_graph(pts, 0.05, 8, 0);
    CHECK(g.n_nodes == 3);
    CHECK(g.in_degree(0) == 1);
    CHECK(g.in_degree(1) == 2);
    CHECK(g.in_degree(2) == 1);
    // neighbors are within r and carry the correct geometry
    for (const auto& e : g.edges) CHECK(e.src != e.dst);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const auto expect = geompnn::edge_geometry(pts[g.edges[i].src], pts[g.edges[i].dst]);
      CHECK(g.edge_geom[i] == expect);
      CHECK(g.edge_geom[i][2] <= 0.05);
    }
  }

  TEST_CASE("degree cap keeps exactly M in-radius neighbors") {
    // ten points clustered around a center, all within r of it
    std::vector<Point2> pts{{0.0, 0.0}};
    for (int i = 0; i < 10; ++i) {
      const double th = 2.0 * M_PI * i / 10.0;
      pts.push_back({0.02 * std::cos(th), 0.02 * std::sin(th)});
    }
    const NeighborGraph g = geompnn::radius_graph(pts, 0.05, 4, 123);
    CHECK(g.in_degree(0) == 4);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      CHECK(g.edge_geom[i][2] <= 0.05);
      CHECK(g.edges[i].src != g.edges[i].dst);
    }
    // kept neighbors form a 4-subset of the true neighborhood
    std::set<std::size_t> kept;
    for (std::size_t e = g.offsets[0]; e < g.offsets[1]; ++e) {
      CHECK(g.edges[e].dst == 0);
      kept.insert(g.edges[e].src);
    }
    CHECK(kept.size() == 4);
    for (std::size_t s : kept) CHECK(s >= 1);
  }

  TEST_CASE("radius graph is deterministic in the seed") {
    geompnn::Rng rng(55);
    std::vector<Point2> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.3)});
    const NeighborGraph a = geompnn::radius_graph(pts, 0.05, 3, 7);
    const NeighborGraph b = geompnn::radius_graph(pts, 0.05, 3, 7);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].src == b.edges[i].src);
      CHECK(a.edges[i].dst == b.edges[i].dst);
    }
    // a different seed changes some capped neighborhood
    const NeighborGraph c = geompnn::radius_graph(pts, 0.05, 3, 8);
    bool any_diff = c.edges.size() != a.edges.size();
    for (std::size_t i = 0; !any_diff && i < a.edges.size(); ++i)
      any_diff = a.edges[i].src != c.edges[i].src || a.edges[i].dst != c.edges[i].dst;
    CHECK(any_diff);
    // parallel assembly equals serial assembly
    const NeighborGraph d = geompnn::radius_graph(pts, 0.05, 3, 7, false);
    REQUIRE(d.edges.size() == a.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].src == d.edges[i].src);
      CHECK(a.edges[i].dst == d.edges[i].dst);
    }
  }

  TEST_CASE("radius graph never caps below min(M, |N|) and CSR offsets are consistent") {
    geompnn::Rng rng(56);
    std::vector<Point2> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    const NeighborGraph g = geompnn::radius_graph(pts, 0.08, 5, 3);
    REQUIRE(g.offsets.size() == pts.size() + 1);
    CHECK(g.offsets.back() == g.edges.size());
    const geompnn::KdTree2 tree(pts);
    for (std::size_t v = 0; v < pts.size(); ++v) {
      const std::size_t true_n = tree.radius(pts[v], 0.08).size() - 1;  // minus self
      CHECK(g.in_degree(v) == std::min<std::size_t>(5, true_n));
    }
  }

  TEST_CASE("surf2vol with k = 1 links every point to its closest surface point") {
    const MeshCase c = ring_case(16, 40, 3);
    const BipartiteGraph g = geompnn::surf2vol_graph(c, 1);
    CHECK(g.n_dst == c.size());
    CHECK(g.k == 1);
    REQUIRE(g.edges.size() == c.size());
    for (std::size_t x = 0; x < c.size(); ++x) {
      const auto e = g.edges[g.offsets[x]];
      CHECK(e.dst == x);
      const std::size_t y = g.surface_nodes[e.src];
      // no other surface point is strictly closer
      const double dy = std::hypot(c.points[y].x - c.points[x].x, c.points[y].y - c.points[x].y);
      for (std::size_t s : c.surface_idx) {
        const double ds =
            std::hypot(c.points[s].x - c.points[x].x, c.points[s].y - c.points[x].y);
        CHECK(dy <= ds + 1e-15);
      }
    }
  }

  TEST_CASE("surf2vol in-degree is a point mass at k") {
    const MeshCase c = ring_case(24, 100, 4);
    const BipartiteGraph g = geompnn::surf2vol_graph(c, 8);
    REQUIRE(g.offsets.size() == c.size() + 1);
    for (std::size_t x = 0; x < c.size(); ++x) CHECK(g.offsets[x + 1] - g.offsets[x] == 8);
    CHECK(g.edges.size() == 8 * c.size());
    // sources are surface rows; geometry matches the points
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const std::size_t y = g.surface_nodes[g.edges[i].src];
      const std::size_t x = g.edges[i].dst;
      CHECK(g.edge_geom[i] == geompnn::edge_geometry(c.points[y], c.points[x]));
    }
  }

  TEST_CASE("surface points are themselves surf2vol destinations") {
    const MeshCase c = ring_case(16, 10, 5);
    const BipartiteGraph g = geompnn::surf2vol_graph(c, 1);
    // a surface point's nearest surface point is itself (distance zero)
    const std::size_t s0 = c.surface_idx[0];
    const auto e = g.edges[g.offsets[s0]];
    CHECK(g.surface_nodes[e.src] == s0);
  }

  TEST_CASE("surf2vol neighborhoods are unchanged on any volume subset") {
    const MeshCase c = ring_case(24, 200, 6);
    const BipartiteGraph full = geompnn::surf2vol_graph(c, 8);
    const auto sub = geompnn::subsample(c, 60, 17);
    const BipartiteGraph part = geompnn::surf2vol_graph(sub.sampled, 8);
    REQUIRE(part.n_dst == sub.sampled.size());
    for (std::size_t xs = 0; xs < part.n_dst; ++xs) {
      const std::size_t xf = sub.index_map[xs];
      REQUIRE(part.offsets[xs + 1] - part.offsets[xs] == full.offsets[xf + 1] - full.offsets[xf]);
      for (std::size_t j = 0; j < 8; ++j) {
        const auto& es = part.edges[part.offsets[xs] + j];
        const auto& ef = full.edges[full.offsets[xf] + j];
        // same physical surface point, in the same order
        CHECK(sub.index_map[part.surface_nodes[es.src]] == full.surface_nodes[ef.src]);
        CHECK(part.edge_geom[part.offsets[xs] + j] == full.edge_geom[full.offsets[xf] + j]);
      }
    }
  }

  TEST_CASE("surf2vol rejects k larger than the surface") {
    const MeshCase c = ring_case(4, 10, 7);
    CHECK_THROWS_AS(geompnn::surf2vol_graph(c, 5), geompnn::data_error);
    CHECK_NOTHROW(geompnn::surf2vol_graph(c, 4));
  }

  TEST_CASE("surf2vol parallel equals serial") {
    const MeshCase c = ring_case(16, 80, 8);
    const BipartiteGraph a = geompnn::surf2vol_graph(c, 4, true);
    const BipartiteGraph b = geompnn::surf2vol_graph(c, 4, false);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].src == b.edges[i].src);
      CHECK(a.edges[i].dst == b.edges[i].dst);
      CHECK(a.edge_geom[i] == b.edge_geom[i]);
    }
  }
}
