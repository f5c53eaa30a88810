#include "geompnn/synthetic.hpp"

#include <cassert>
#include <cmath>
#include <vector>

#include "geompnn/errors.hpp"
#include "geompnn/geom.hpp"

namespace geompnn {

namespace {

constexpr double kC = 1.0;          // map scale: z = zeta + kC^2 / zeta
constexpr double kCuspTol = 1e-9;   // |zeta - kC| below this uses the cusp limit

using cplx = std::complex<double>;

}  // namespace

JoukowskiParams sample_params(const ParamRanges& r, Rng& rng) {
  JoukowskiParams p;
  p.mu_x = rng.uniform(r.mu_x_min, r.mu_x_max);
  p.mu_y = rng.uniform(r.mu_y_min, r.mu_y_max);
  p.speed = rng.uniform(r.speed_min, r.speed_max);
  p.alpha = rng.uniform(r.alpha_min, r.alpha_max);
  return p;
}

JoukowskiFlow::JoukowskiFlow(const JoukowskiParams& p)
    : mu_(p.mu_x, p.mu_y), speed_(p.speed), alpha_(p.alpha) {
  if (!(p.mu_x < 0.0)) {
    throw data_error("joukowski: mu_x must be negative for a non-degenerate body");
  }
  if (!(p.speed > 0.0)) throw data_error("joukowski: inlet speed must be positive");
  const cplx lever = cplx(kC, 0.0) - mu_;  // trailing edge seen from the center
  a_ = std::abs(lever);
  gamma_ = std::arg(lever);
  // Kutta condition: the rear stagnation point sits on the trailing edge.
  gamma_circ_ = 4.0 * M_PI * speed_ * a_ * std::sin(gamma_ - alpha_);
}

Point2 JoukowskiFlow::inlet_velocity() const {
  return {speed_ * std::cos(alpha_), speed_ * std::sin(alpha_)};
}

cplx JoukowskiFlow::map(cplx zeta) const { return zeta + (kC * kC) / zeta; }

cplx JoukowskiFlow::circle_point(double theta) const {
  // e^{i gamma} taken as the exact unit lever so theta = 0 lands on the
  // trailing edge to within rounding.
  const cplx e_gamma = (cplx(kC, 0.0) - mu_) / a_;
  return mu_ + a_ * e_gamma * std::polar(1.0, theta);
}

Point2 JoukowskiFlow::velocity(cplx zeta) const {
  const cplx i(0.0, 1.0);
  const cplx rel = zeta - mu_;
  cplx w;  // complex velocity u - i v
  if (std::abs(zeta - cplx(kC, 0.0)) < kCuspTol) {
    // 0/0 at the cusp: both dw/dzeta and dz/dzeta vanish, so take the ratio
    // of their derivatives.
    const cplx e_mg = std::polar(1.0, -gamma_);
    const cplx d2w = 2.0 * speed_ * std::polar(1.0, alpha_) * e_mg * e_mg * e_mg / a_ +
                     i * gamma_circ_ * e_mg * e_mg / (2.0 * M_PI * a_ * a_);
    const cplx d2z = 2.0 * (kC * kC) / (kC * kC * kC);
    w = d2w / d2z;
  } else {
    const cplx dw = speed_ * std::polar(1.0, -alpha_) -
                    speed_ * std::polar(1.0, alpha_) * (a_ * a_) / (rel * rel) -
                    i * gamma_circ_ / (2.0 * M_PI * rel);
    const cplx dz = 1.0 - (kC * kC) / (zeta * zeta);
    w = dw / dz;
  }
  return {w.real(), -w.imag()};
}

double JoukowskiFlow::pressure(const Point2& v) const {
  return 0.5 * (speed_ * speed_ - (v.x * v.x + v.y * v.y));
}

GeneratedCase generate_case_full(const JoukowskiParams& params, const GenerateConfig& cfg,
                                 std::uint64_t seed, const std::string& case_id) {
  if (cfg.n_surface < 3) throw data_error("generate: need at least 3 surface points");
  if (cfg.min_radius_factor <= 1.0 || cfg.max_radius_factor <= cfg.min_radius_factor) {
    throw data_error("generate: radius factors must satisfy 1 < min < max");
  }
  const JoukowskiFlow flow(params);
  const std::size_t ns = cfg.n_surface;

  // Body contour; index 0 is exactly the trailing edge.
  std::vector<cplx> zetas;
  zetas.reserve(ns + cfg.n_volume);
  std::vector<Point2> phys;
  phys.reserve(ns + cfg.n_volume);
  for (std::size_t j = 0; j < ns; ++j) {
    const double theta = 2.0 * M_PI * double(j) / double(ns);
    const cplx zeta = flow.circle_point(theta);
    zetas.push_back(zeta);
    const cplx z = flow.map(zeta);
    phys.push_back({z.real(), z.imag()});
  }

  // Volume points sampled as circle-exterior preimages: radius factor
  // log-uniform in [min, max], angle uniform. The image is then guaranteed
  // to lie outside the body.
  Rng rng(mix_seed(seed, hash_label("volume-points"), 0));
  const double log_lo = std::log(cfg.min_radius_factor);
  const double log_hi = std::log(cfg.max_radius_factor);
  for (std::size_t i = 0; i < cfg.n_volume; ++i) {
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    const double r = flow.circle_radius() * std::exp(rng.uniform(log_lo, log_hi));
    const cplx zeta = flow.mu() + std::polar(r, theta);
    zetas.push_back(zeta);
    const cplx z = flow.map(zeta);
    phys.push_back({z.real(), z.imag()});
  }

  // Outward unit normals from the contour polygon. Each edge normal is
  // oriented with the pushforward of the radial direction at the edge
  // midpoint (never a critical point, since the cusp sits on a vertex);
  // vertex normals average the two adjacent edge normals.
  std::vector<Point2> edge_normals(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    const std::size_t jn = (j + 1) % ns;
    const Point2 ev = phys[jn] - phys[j];
    Point2 n{ev.y, -ev.x};
    const double theta_mid = 2.0 * M_PI * (double(j) + 0.5) / double(ns);
    const cplx zeta_mid = flow.circle_point(theta_mid);
    const cplx radial = (zeta_mid - flow.mu()) / flow.circle_radius();
    const cplx dz = 1.0 - (kC * kC) / (zeta_mid * zeta_mid);
    const cplx out = dz * radial;
    if (n.x * out.real() + n.y * out.imag() < 0.0) n = {-n.x, -n.y};
    const double len = norm(n);
    if (!(len > 0.0)) throw data_error("generate: degenerate contour edge");
    edge_normals[j] = {n.x / len, n.y / len};
  }
  std::vector<Point2> normals(phys.size(), Point2{0.0, 0.0});
  for (std::size_t j = 0; j < ns; ++j) {
    const std::size_t jp = (j + ns - 1) % ns;
    Point2 sum = edge_normals[jp] + edge_normals[j];
    double len = norm(sum);
    if (len < 1e-12) {
      // cusp bisector fallback: outward direction e^{2 i gamma}
      sum = {std::cos(2.0 * flow.circle_angle()), std::sin(2.0 * flow.circle_angle())};
      len = 1.0;
    }
    normals[j] = {sum.x / len, sum.y / len};
  }

  // Normalize: leading edge to the origin, chord to exactly 1.
  std::size_t lead = 0, trail = 0;
  for (std::size_t j = 1; j < ns; ++j) {
    if (phys[j].x < phys[lead].x) lead = j;
    if (phys[j].x > phys[trail].x) trail = j;
  }
  const Point2 z_lead = phys[lead];
  const double chord = phys[trail].x - phys[lead].x;
  if (!(chord > 0.0)) throw data_error("generate: non-positive chord");

  GeneratedCase out;
  out.z_lead = cplx(z_lead.x, z_lead.y);
  out.chord = chord;

  MeshCase& mesh = out.mesh;
  mesh.case_id = case_id;
  mesh.inlet_velocity = flow.inlet_velocity();
  mesh.points.reserve(phys.size());
  for (const Point2& p : phys) {
    mesh.points.push_back({(p.x - z_lead.x) / chord, (p.y - z_lead.y) / chord});
  }
  mesh.normals = std::move(normals);
  for (std::size_t j = 0; j < ns; ++j) mesh.surface_idx.push_back(j);

  std::vector<Point2> surf_pts(mesh.points.begin(), mesh.points.begin() + ns);
  mesh.wall_distance.resize(mesh.points.size());
  for (std::size_t i = 0; i < mesh.points.size(); ++i) {
    mesh.wall_distance[i] = i < ns ? 0.0 : wall_distance_polyline(mesh.points[i], surf_pts);
  }

  // Analytic targets. The wake proxy lives in trailing-edge coordinates
  // rotated so the inlet velocity points along +x.
  const Rotation2 rv = canonical_rotation(mesh.inlet_velocity);
  const Point2 te = mesh.points[trail];
  std::vector<TargetRow> targets(mesh.points.size());
  for (std::size_t i = 0; i < mesh.points.size(); ++i) {
    const Point2 vel = flow.velocity(zetas[i]);
    const double p = flow.pressure(vel);
    const Point2 w = rv.apply(mesh.points[i] - te);
    const double decay = std::exp(-(w.y / cfg.wake_width) * (w.y / cfg.wake_width));
    const double along = w.x > 0.0 ? w.x / (1.0 + w.x) : 0.0;
    targets[i] = {vel.x, vel.y, p, decay * along};
  }
  mesh.targets = std::move(targets);

  validate_case(mesh, case_id);
  return out;
}

MeshCase generate_case(const JoukowskiParams& params, const GenerateConfig& cfg,
                       std::uint64_t seed, const std::string& case_id) {
  return generate_case_full(params, cfg, seed, case_id).mesh;
}

}  // namespace geompnn
