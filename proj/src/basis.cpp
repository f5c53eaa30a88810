#include "geompnn/basis.hpp"

#include <cmath>

#include "geompnn/errors.hpp"

namespace geompnn {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
}

double SineBasisConfig::base() const { return 4.0 * L / (s * kPi); }

void sine_embed_into(double x, const SineBasisConfig& cfg, double* out) {
  double scaled = x / cfg.s;
  double d = cfg.base();
  for (int i = 0; i < cfg.n_basis; ++i) {
    double arg = scaled / std::pow(d, static_cast<double>(i) / cfg.n_basis);
    out[2 * i] = std::sin(arg);
    out[2 * i + 1] = std::cos(arg);
  }
}

std::vector<double> sine_embed(double x, const SineBasisConfig& cfg) {
  if (!cfg.valid()) throw data_error("invalid sine basis config");
  std::vector<double> out(2 * cfg.n_basis);
  sine_embed_into(x, cfg, out.data());
  return out;
}

void sine_embed_vec_into(const Point2& p, const SineBasisConfig& cfg, double* out) {
  sine_embed_into(p.x, cfg, out);
  sine_embed_into(p.y, cfg, out + 2 * cfg.n_basis);
}

std::vector<double> sine_embed_vec(const Point2& p, const SineBasisConfig& cfg) {
  if (!cfg.valid()) throw data_error("invalid sine basis config");
  std::vector<double> out(4 * cfg.n_basis);
  sine_embed_vec_into(p, cfg, out.data());
  return out;
}

HarmonicTables::HarmonicTables(int n_basis, bool factorial_norm)
    : n_basis_(n_basis), factorial_norm_(factorial_norm) {
  if (n_basis < 1) throw data_error("HarmonicTables: n_basis must be >= 1");
  norms_.resize(n_basis + 1, 0.0);
  coeffs_.resize(n_basis + 1);

  for (int l = 1; l <= n_basis; ++l) {
    double num = 2.0 * l + 1.0;
    if (factorial_norm) {
      num = 1.0;
      for (int k = 2; k <= 2 * l + 1; ++k) num *= k;
    }
    norms_[l] = std::sqrt(num / (4.0 * kPi));
  }

  // Monomial coefficients via the same recurrence applied to polynomials:
  // (l+1) P_{l+1} = (2l+1) u P_l - l P_{l-1}.
  std::vector<double> prev{1.0};        // P_0
  std::vector<double> cur{0.0, 1.0};    // P_1
  if (n_basis >= 1) coeffs_[1] = cur;
  for (int l = 1; l < n_basis; ++l) {
    std::vector<double> next(l + 2, 0.0);
    for (std::size_t k = 0; k < cur.size(); ++k)
      next[k + 1] += (2.0 * l + 1.0) * cur[k] / (l + 1.0);
    for (std::size_t k = 0; k < prev.size(); ++k)
      next[k] -= static_cast<double>(l) * prev[k] / (l + 1.0);
    coeffs_[l + 1] = next;
    prev = std::move(cur);
    cur = std::move(next);
  }
}

double HarmonicTables::legendre(int l, double u) {
  if (l == 0) return 1.0;
  double pm1 = 1.0;
  double p = u;
  for (int k = 1; k < l; ++k) {
    double pn = ((2.0 * k + 1.0) * u * p - k * pm1) / (k + 1.0);
    pm1 = p;
    p = pn;
  }
  return p;
}

double HarmonicTables::even(int l, double theta) const {
  return norms_[l] * legendre(l, std::cos(theta));
}

double HarmonicTables::odd(int l, double theta) const {
  return norms_[l] * legendre(l, std::sin(theta));
}

void sph_embed_into(double theta, const HarmonicTables& tables, double* out) {
  double c = std::cos(theta);
  double s = std::sin(theta);
  int n = tables.n_basis();
  // Run both recurrences in lockstep instead of re-evaluating per order.
  double pc_m1 = 1.0, pc = c;
  double ps_m1 = 1.0, ps = s;
  for (int l = 1; l <= n; ++l) {
    double nl = tables.norm_constant(l);
    out[2 * (l - 1)] = nl * pc;
    out[2 * (l - 1) + 1] = nl * ps;
    double pc_n = ((2.0 * l + 1.0) * c * pc - l * pc_m1) / (l + 1.0);
    double ps_n = ((2.0 * l + 1.0) * s * ps - l * ps_m1) / (l + 1.0);
    pc_m1 = pc;
    pc = pc_n;
    ps_m1 = ps;
    ps = ps_n;
  }
}

std::vector<double> sph_embed(double theta, const HarmonicTables& tables) {
  std::vector<double> out(2 * tables.n_basis());
  sph_embed_into(theta, tables, out.data());
  return out;
}

}  // namespace geompnn
