#pragma once

#include <vector>

#include "geompnn/mesh.hpp"

namespace geompnn {

/// Frequency layout for sinusoidal coordinate embeddings. `s` tracks the grid
/// spacing and `L` the domain size; the frequency base is d = 4L/(s*pi).
struct SineBasisConfig {
  int n_basis = 8;
  double s = 1.0;
  double L = 1.0;

  double base() const;  // d = 4L/(s*pi)
  bool valid() const { return n_basis >= 1 && s > 0.0 && L > 0.0; }
};

/// Embeds a scalar as [sin_0, cos_0, sin_1, cos_1, ...] with argument
/// (x/s) / d^(i/n_basis) for i = 0..n_basis-1. Length 2*n_basis.
std::vector<double> sine_embed(double x, const SineBasisConfig& cfg);

/// Concatenation [sine_embed(x), sine_embed(y)]. Length 4*n_basis.
std::vector<double> sine_embed_vec(const Point2& p, const SineBasisConfig& cfg);

/// Writers used by the batch feature assembly (no allocation).
void sine_embed_into(double x, const SineBasisConfig& cfg, double* out);
void sine_embed_vec_into(const Point2& p, const SineBasisConfig& cfg, double* out);

/// m=0 spherical-harmonic angle basis of orders 1..n_basis. Evaluation runs
/// the Legendre three-term recurrence; the monomial coefficient table is kept
/// only so tests can cross-check the recurrence.
class HarmonicTables {
 public:
  /// factorial_norm reproduces the literal sqrt((2l+1)!/4pi) scaling; the
  /// default is the standard sqrt((2l+1)/4pi).
  explicit HarmonicTables(int n_basis = 8, bool factorial_norm = false);

  int n_basis() const { return n_basis_; }
  bool factorial_norm() const { return factorial_norm_; }

  /// Normalization constant for order l (1-based).
  double norm_constant(int l) const { return norms_[l]; }

  /// Monomial coefficients of P_l: coeffs(l)[k] multiplies u^k.
  const std::vector<double>& coeffs(int l) const { return coeffs_[l]; }

  /// Legendre P_l(u) by recurrence.
  static double legendre(int l, double u);

  /// Even harmonic  Y_l(theta)  = N_l * P_l(cos(theta)).
  double even(int l, double theta) const;
  /// Odd  harmonic  Y~_l(theta) = N_l * P_l(sin(theta)).
  double odd(int l, double theta) const;

 private:
  int n_basis_;
  bool factorial_norm_;
  std::vector<double> norms_;                // index 0 unused
  std::vector<std::vector<double>> coeffs_;  // index 0 unused
};

/// [Y_1, Y~_1, ..., Y_n, Y~_n](theta). Length 2*n_basis.
std::vector<double> sph_embed(double theta, const HarmonicTables& tables);
void sph_embed_into(double theta, const HarmonicTables& tables, double* out);

}  // namespace geompnn
