#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "geompnn/errors.hpp"
#include "geompnn/geom.hpp"
#include "geompnn/mesh.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/synthetic.hpp"

using geompnn::GenerateConfig;
using geompnn::JoukowskiFlow;
using geompnn::JoukowskiParams;
using geompnn::MeshCase;
using geompnn::Point2;
using std::numbers::pi;

TEST_SUITE("synthetic") {
  TEST_CASE("degenerate shape or flow parameters are rejected") {
    JoukowskiParams p;
    p.mu_x = 0.0;  // circle through the second critical point: cusp degenerates
    CHECK_THROWS_AS(JoukowskiFlow{p}, geompnn::data_error);
    p.mu_x = 0.1;
    CHECK_THROWS_AS(JoukowskiFlow{p}, geompnn::data_error);
    p = JoukowskiParams{};
    p.speed = 0.0;
    CHECK_THROWS_AS(JoukowskiFlow{p}, geompnn::data_error);
  }

  TEST_CASE("the generating circle passes through the trailing-edge preimage") {
    const JoukowskiParams p{};
    const JoukowskiFlow flow(p);
    const std::complex<double> te = flow.circle_point(0.0);
    CHECK(te.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(te.imag() == doctest::Approx(0.0).epsilon(1e-12));
    // radius equals |1 - mu|
    CHECK(flow.circle_radius() ==
          doctest::Approx(std::abs(std::complex<double>(1.0 - p.mu_x, -p.mu_y))).epsilon(1e-14));
  }

  TEST_CASE("circulation satisfies the trailing-edge condition value") {
    JoukowskiParams p;
    p.mu_x = -0.15;
    p.mu_y = 0.08;
    p.speed = 12.0;
    p.alpha = 0.1;
    const JoukowskiFlow flow(p);
    const double expect =
        4.0 * pi * p.speed * flow.circle_radius() * std::sin(flow.circle_angle() - p.alpha);
    CHECK(flow.circulation() == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("velocity is finite and continuous at the trailing-edge cusp") {
    JoukowskiParams p;
    p.mu_y = 0.06;
    p.alpha = 0.05;
    const JoukowskiFlow flow(p);
    const Point2 at_cusp = flow.velocity(flow.circle_point(0.0));
    REQUIRE(std::isfinite(at_cusp.x));
    REQUIRE(std::isfinite(at_cusp.y));
    // approach along the circle: velocities converge to the cusp value
    const Point2 near1 = flow.velocity(flow.circle_point(1e-4));
    const Point2 near2 = flow.velocity(flow.circle_point(-1e-4));
    CHECK(near1.x == doctest::Approx(at_cusp.x).epsilon(5e-3));
    CHECK(near1.y == doctest::Approx(at_cusp.y).epsilon(5e-3));
    CHECK(near2.x == doctest::Approx(at_cusp.x).epsilon(5e-3));
    CHECK(near2.y == doctest::Approx(at_cusp.y).epsilon(5e-3));
  }

  TEST_CASE("no flow crosses the body surface") {
    JoukowskiParams p;
    p.mu_x = -0.2;
    p.mu_y = 0.07;
    p.alpha = 0.12;
    const JoukowskiFlow flow(p);
    // tangency: velocity at a surface point is parallel to the mapped contour
    for (double th : {0.5, 1.2, 2.8, 4.0, 5.5}) {
      const std::complex<double> zeta = flow.circle_point(th);
      const Point2 u = flow.velocity(zeta);
      // numerical tangent of the image contour
      const std::complex<double> z1 = flow.map(flow.circle_point(th + 1e-6));
      const std::complex<double> z0 = flow.map(flow.circle_point(th - 1e-6));
      const Point2 tangent{z1.real() - z0.real(), z1.imag() - z0.imag()};
      const double tl = std::hypot(tangent.x, tangent.y);
      const double cross = (u.x * tangent.y - u.y * tangent.x) / tl;
      CHECK(std::abs(cross) / std::max(1.0, std::hypot(u.x, u.y)) < 1e-4);
    }
  }

  TEST_CASE("a symmetric airfoil at zero incidence gives mirror-symmetric fields") {
    JoukowskiParams p;
    p.mu_y = 0.0;
    p.alpha = 0.0;
    const JoukowskiFlow flow(p);
    geompnn::Rng rng(8);
    for (int i = 0; i < 100; ++i) {
      const double r = flow.circle_radius() * rng.uniform(1.05, 10.0);
      const double th = rng.uniform(0.0, 2 * pi);
      const std::complex<double> zeta = flow.mu() + std::polar(r, th);
      const std::complex<double> zeta_m = std::conj(zeta);  // mu real: mirror preimage
      const Point2 u = flow.velocity(zeta);
      const Point2 um = flow.velocity(zeta_m);
      CHECK(um.x == doctest::Approx(u.x).epsilon(1e-9));   // u_x even in y
      CHECK(um.y == doctest::Approx(-u.y).epsilon(1e-9));  // u_y odd in y
      CHECK(flow.pressure(um) == doctest::Approx(flow.pressure(u)).epsilon(1e-9));
    }
  }

  TEST_CASE("far-field velocity approaches the inlet and gauge pressure vanishes") {
    JoukowskiParams p;
    p.mu_y = 0.05;
    p.alpha = 0.15;
    p.speed = 20.0;
    const JoukowskiFlow flow(p);
    const Point2 vinf = flow.inlet_velocity();
    CHECK(std::hypot(vinf.x, vinf.y) == doctest::Approx(p.speed).epsilon(1e-12));
    CHECK(vinf.y / vinf.x == doctest::Approx(std::tan(p.alpha)).epsilon(1e-12));
    geompnn::Rng rng(9);
    for (int i = 0; i < 50; ++i) {
      // 50 chords out (chord ~ 4 circle radii for these shapes)
      const std::complex<double> zeta =
          flow.mu() + std::polar(200.0 * flow.circle_radius(), rng.uniform(0.0, 2 * pi));
      const Point2 u = flow.velocity(zeta);
      CHECK(std::hypot(u.x - vinf.x, u.y - vinf.y) / p.speed < 0.01);
      CHECK(std::abs(flow.pressure(u)) / (0.5 * p.speed * p.speed) < 0.02);
    }
    // Bernoulli with unit density against the freestream reference
    const Point2 u{15.0, -3.0};
    CHECK(flow.pressure(u) ==
          doctest::Approx(0.5 * (p.speed * p.speed - (15.0 * 15.0 + 9.0))).epsilon(1e-12));
  }

  TEST_CASE("generated cases are valid for 100 random parameter draws") {
    geompnn::Rng rng(77);
    const geompnn::ParamRanges ranges;
    GenerateConfig gc;
    gc.n_surface = 40;
    gc.n_volume = 60;
    for (int i = 0; i < 100; ++i) {
      const JoukowskiParams p = geompnn::sample_params(ranges, rng);
      CHECK(p.mu_x >= ranges.mu_x_min);
      CHECK(p.mu_x <= ranges.mu_x_max);
      const MeshCase c = geompnn::generate_case(p, gc, 1000 + i, "draw");
      CHECK_NOTHROW(geompnn::validate_case(c, "draw"));
      REQUIRE(c.targets.has_value());
      for (const auto& row : *c.targets) {
        for (double v : row) REQUIRE(std::isfinite(v));
        CHECK(row[3] >= 0.0);  // the viscosity proxy is nonnegative
      }
    }
  }

  TEST_CASE("generated meshes are normalized to the unit chord") {
    const MeshCase c =
        geompnn::generate_case(JoukowskiParams{}, {.n_surface = 64, .n_volume = 100}, 5, "norm");
    const std::size_t lead = geompnn::leading_edge_index(c);
    CHECK(c.points[lead].x == 0.0);
    CHECK(c.points[lead].y == 0.0);
    CHECK(geompnn::trailing_edge(c).x == 1.0);
    // wall distance is exactly zero on the surface and positive elsewhere
    for (std::size_t i : c.surface_idx) CHECK(c.wall_distance[i] == 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c.is_surface(i)) CHECK(c.wall_distance[i] > 0.0);
    }
  }

  TEST_CASE("generation is deterministic in the seed") {
    GenerateConfig gc;
    gc.n_surface = 48;
    gc.n_volume = 80;
    const MeshCase a = geompnn::generate_case(JoukowskiParams{}, gc, 42, "det");
    const MeshCase b = geompnn::generate_case(JoukowskiParams{}, gc, 42, "det");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.points[i].x == b.points[i].x);
      CHECK(a.points[i].y == b.points[i].y);
      CHECK((*a.targets)[i] == (*b.targets)[i]);
    }
    const MeshCase d = geompnn::generate_case(JoukowskiParams{}, gc, 43, "det");
    bool differs = false;
    for (std::size_t i = 0; i < a.size() && !differs; ++i)
      differs = a.points[i].x != d.points[i].x || a.points[i].y != d.points[i].y;
    CHECK(differs);
  }

  TEST_CASE("volume targets follow the analytic solution after normalization") {
    // velocities and pressure are invariant under translation + scaling of
    // the geometry, so generated targets must equal the flow evaluated at
    // the physical preimage of each mesh point
    JoukowskiParams p;
    p.mu_y = 0.03;
    p.alpha = 0.08;
    const auto gen = geompnn::generate_case_full(p, {.n_surface = 32, .n_volume = 50}, 11, "phys");
    const JoukowskiFlow flow(p);
    const MeshCase& c = gen.mesh;
    const Point2 vinf = flow.inlet_velocity();
    CHECK(c.inlet_velocity.x == vinf.x);
    CHECK(c.inlet_velocity.y == vinf.y);
    // far-field check through the normalized mesh: distant points carry
    // near-freestream targets
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Point2 x = c.points[i];
      if (std::hypot(x.x, x.y) > 20.0) {
        const auto& t = (*c.targets)[i];
        CHECK(std::hypot(t[0] - vinf.x, t[1] - vinf.y) / p.speed < 0.05);
      }
    }
  }

  TEST_CASE("the viscosity proxy concentrates in the wake behind the trailing edge") {
    JoukowskiParams p;  // v_inf along +x
    const MeshCase c =
        geompnn::generate_case(p, {.n_surface = 64, .n_volume = 600}, 13, "wake");
    const Point2 te = geompnn::trailing_edge(c);
    double wake_mean = 0.0, upstream_max = 0.0, off_axis_max = 0.0;
    std::size_t wake_n = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Point2 x = c.points[i];
      const double nut = (*c.targets)[i][3];
      if (x.x > te.x + 0.1 && std::abs(x.y - te.y) < 0.05) {
        wake_mean += nut;
        ++wake_n;
      }
      if (x.x < -0.2) upstream_max = std::max(upstream_max, nut);
      if (std::abs(x.y - te.y) > 1.0) off_axis_max = std::max(off_axis_max, nut);
    }
    REQUIRE(wake_n > 0);
    wake_mean /= double(wake_n);
    CHECK(wake_mean > 0.05);
    CHECK(upstream_max == 0.0);       // cut off by the downstream gate
    CHECK(off_axis_max < wake_mean);  // Gaussian decay across the wake
  }
}
