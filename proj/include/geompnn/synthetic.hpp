#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include "geompnn/mesh.hpp"
#include "geompnn/rng.hpp"

namespace geompnn {

/// Shape and flow parameters of one analytic case. The body is the image of
/// a circle through zeta = 1 with center mu under z = zeta + 1/zeta; mu_x < 0
/// keeps the map injective outside the circle (the second critical point
/// zeta = -1 then lies strictly inside).
struct JoukowskiParams {
  double mu_x = -0.10;  // must be negative
  double mu_y = 0.05;
  double speed = 30.0;  // inlet speed
  double alpha = 0.0;   // angle of attack, radians
};

/// Sampling ranges for randomized datasets.
struct ParamRanges {
  double mu_x_min = -0.25, mu_x_max = -0.05;
  double mu_y_min = -0.10, mu_y_max = 0.10;
  double speed_min = 10.0, speed_max = 50.0;
  double alpha_min = -0.10, alpha_max = 0.20;
};

JoukowskiParams sample_params(const ParamRanges& ranges, Rng& rng);

/// Incompressible potential flow around the mapped circle with the
/// circulation fixed by the trailing-edge (Kutta) condition. Works in the
/// physical plane, before mesh normalization.
class JoukowskiFlow {
 public:
  explicit JoukowskiFlow(const JoukowskiParams& p);  // throws data_error if mu_x >= 0

  double circle_radius() const { return a_; }
  double circle_angle() const { return gamma_; }  // arg(1 - mu)
  double circulation() const { return gamma_circ_; }
  Point2 inlet_velocity() const;
  std::complex<double> mu() const { return mu_; }

  /// Conformal map z = zeta + 1/zeta.
  std::complex<double> map(std::complex<double> zeta) const;
  /// Point on the generating circle, theta measured from the trailing edge:
  /// zeta = mu + a e^{i(gamma + theta)}. circle_point(0) is the trailing edge.
  std::complex<double> circle_point(double theta) const;

  /// Flow velocity at the image of zeta (|zeta - mu| >= a). The trailing-edge
  /// cusp is handled by its analytic limit.
  Point2 velocity(std::complex<double> zeta) const;
  /// Gauge pressure via Bernoulli (unit density).
  double pressure(const Point2& velocity) const;

 private:
  std::complex<double> mu_;
  double a_ = 0.0;
  double gamma_ = 0.0;
  double gamma_circ_ = 0.0;
  double speed_ = 0.0;
  double alpha_ = 0.0;
};

/// Mesh resolution and sampling extents for generated cases.
struct GenerateConfig {
  std::size_t n_surface = 200;
  std::size_t n_volume = 7800;          // non-surface points
  double min_radius_factor = 1.01;      // closest volume ring, in circle radii
  double max_radius_factor = 170.0;     // far-field extent, in circle radii
  double wake_width = 0.1;              // Gaussian half-width of the viscosity proxy
};

struct GeneratedCase {
  MeshCase mesh;                 // normalized: leading edge at (0,0), unit chord
  std::complex<double> z_lead;   // physical-plane leading edge
  double chord = 0.0;            // physical-plane chord length
};

/// Builds a complete labeled case: surface ring containing the trailing edge
/// exactly, log-radially sampled volume points (guaranteed outside the body
/// by sampling preimages), outward unit normals, exact polyline wall
/// distances, and analytic target fields. Deterministic in (params, cfg,
/// seed).
GeneratedCase generate_case_full(const JoukowskiParams& params, const GenerateConfig& cfg,
                                 std::uint64_t seed, const std::string& case_id);
MeshCase generate_case(const JoukowskiParams& params, const GenerateConfig& cfg,
                       std::uint64_t seed, const std::string& case_id);

}  // namespace geompnn
