#include "geompnn/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "geompnn/net.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/tape.hpp"

namespace geompnn {

double max_rel_grad_error(std::span<const double> theta,
                          const std::function<double(std::span<const double>)>& f,
                          std::span<const double> analytic, double eps) {
  std::vector<double> work(theta.begin(), theta.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double keep = work[i];
    work[i] = keep + eps;
    const double up = f(work);
    work[i] = keep - eps;
    const double down = f(work);
    work[i] = keep;
    const double fd = (up - down) / (2.0 * eps);
    const double ad = analytic[i];
    const double rel = std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1.0});
    worst = std::max(worst, rel);
  }
  return worst;
}

namespace {

/// One primitive check: `build` consumes flat parameters in order, records
/// the op under test plus a fixed linear read-out, and returns the scalar id.
struct PrimitiveSpec {
  std::string name;
  std::vector<double> theta0;
  std::function<Tape::Id(Tape&, std::span<const double>)> build;
};

Tensor take(std::span<const double>& cursor, std::size_t rows, std::size_t cols) {
  Tensor t = Tensor::from_rows(rows, cols, cursor.subspan(0, rows * cols));
  cursor = cursor.subspan(rows * cols);
  return t;
}

std::vector<double> random_values(Rng& rng, std::size_t n, double lo = -1.5, double hi = 1.5) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Reduces an (r x c) tape node to a scalar through fixed random weights:
/// ones_row * (out * w_col). Keeps the op's full Jacobian in play without
/// relying on the loss op under test elsewhere.
Tape::Id linear_readout(Tape& t, Tape::Id out, std::size_t rows, std::size_t cols, Rng rng) {
  Tensor w(cols, 1);
  for (double& x : w.data) x = rng.uniform(-1.0, 1.0);
  Tensor ones(1, rows);
  for (double& x : ones.data) x = 1.0;
  return t.matmul(t.input(ones), t.matmul(out, t.input(w)));
}

GradCheckResult run_spec(const PrimitiveSpec& spec, double eps = 1e-6) {
  Tape tape;
  const Tape::Id loss = spec.build(tape, spec.theta0);
  tape.backward(loss);
  // Parameters are the leading tape nodes, pushed in theta order.
  std::vector<double> analytic;
  analytic.reserve(spec.theta0.size());
  for (Tape::Id id = 0; analytic.size() < spec.theta0.size(); ++id) {
    const Tensor& g = tape.grad(id);
    analytic.insert(analytic.end(), g.data.begin(), g.data.end());
  }
  const auto f = [&spec](std::span<const double> th) {
    Tape t2;
    return t2.value(spec.build(t2, th)).data[0];
  };
  GradCheckResult r;
  r.name = spec.name;
  r.max_rel_error = max_rel_grad_error(spec.theta0, f, analytic, eps);
  return r;
}

}  // namespace

std::vector<GradCheckResult> primitive_gradchecks(std::uint64_t seed) {
  Rng root(seed);
  std::vector<PrimitiveSpec> specs;

  {
    PrimitiveSpec s;
    s.name = "matmul";
    Rng rng = root.stream("matmul", 0);
    s.theta0 = random_values(rng, 4 * 5 + 5 * 3);
    Rng ro = root.stream("matmul-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id a = t.param(take(cur, 4, 5));
      const Tape::Id b = t.param(take(cur, 5, 3));
      return linear_readout(t, t.matmul(a, b), 4, 3, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "add";
    Rng rng = root.stream("add", 0);
    s.theta0 = random_values(rng, 2 * 3 * 4);
    Rng ro = root.stream("add-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id a = t.param(take(cur, 3, 4));
      const Tape::Id b = t.param(take(cur, 3, 4));
      return linear_readout(t, t.add(a, b), 3, 4, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "add_bias";
    Rng rng = root.stream("add_bias", 0);
    s.theta0 = random_values(rng, 5 * 4 + 4);
    Rng ro = root.stream("add_bias-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id x = t.param(take(cur, 5, 4));
      const Tape::Id b = t.param(take(cur, 1, 4));
      return linear_readout(t, t.add_bias(x, b), 5, 4, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "gelu";
    Rng rng = root.stream("gelu", 0);
    s.theta0 = random_values(rng, 4 * 6, -3.0, 3.0);
    Rng ro = root.stream("gelu-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id x = t.param(take(cur, 4, 6));
      return linear_readout(t, t.gelu(x), 4, 6, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "concat_cols";
    Rng rng = root.stream("concat", 0);
    s.theta0 = random_values(rng, 3 * 2 + 3 * 3 + 3 * 4);
    Rng ro = root.stream("concat-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const std::array<Tape::Id, 3> parts{t.param(take(cur, 3, 2)), t.param(take(cur, 3, 3)),
                                          t.param(take(cur, 3, 4))};
      return linear_readout(t, t.concat_cols(parts), 3, 9, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "gather_rows";
    Rng rng = root.stream("gather", 0);
    s.theta0 = random_values(rng, 6 * 3);
    Rng ro = root.stream("gather-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id x = t.param(take(cur, 6, 3));
      // repeated and out-of-order indices exercise the scatter-add transpose
      const Tape::Id g = t.gather_rows(x, {0, 2, 2, 5, 1});
      return linear_readout(t, g, 5, 3, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "segment_mean_by_degree";
    Rng rng = root.stream("segmean", 0);
    s.theta0 = random_values(rng, 7 * 3);
    Rng ro = root.stream("segmean-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id x = t.param(take(cur, 7, 3));
      // groups 2 and 4 stay empty
      const Tape::Id m = t.segment_mean(x, {0, 0, 1, 3, 3, 3, 1}, 5, 0.0);
      return linear_readout(t, m, 5, 3, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "segment_mean_fixed_k";
    Rng rng = root.stream("segmean-k", 0);
    s.theta0 = random_values(rng, 6 * 2);
    Rng ro = root.stream("segmean-k-readout", 0);
    s.build = [ro](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id x = t.param(take(cur, 6, 2));
      const Tape::Id m = t.segment_mean(x, {0, 0, 1, 1, 2, 2}, 3, 2.0);
      return linear_readout(t, m, 3, 2, ro);
    };
    specs.push_back(std::move(s));
  }
  {
    PrimitiveSpec s;
    s.name = "mse_loss";
    Rng rng = root.stream("mse", 0);
    s.theta0 = random_values(rng, 5);
    Rng trng = root.stream("mse-target", 0);
    Tensor target(5, 1);
    for (double& v : target.data) v = trng.uniform(-1.0, 1.0);
    s.build = [target](Tape& t, std::span<const double> th) {
      std::span<const double> cur = th;
      const Tape::Id p = t.param(take(cur, 5, 1));
      return t.mse_loss(p, t.input(target));
    };
    specs.push_back(std::move(s));
  }

  std::vector<GradCheckResult> results;
  results.reserve(specs.size());
  for (const PrimitiveSpec& s : specs) results.push_back(run_spec(s));
  return results;
}

namespace {

/// 30-point case: 6 surface points on a small circle plus 24 volume points.
MeshCase toy_case(std::uint64_t seed) {
  MeshCase c;
  c.case_id = "toy30";
  c.inlet_velocity = {1.0, 0.2};
  Rng rng(mix_seed(seed, hash_label("toy-case"), 0));
  const Point2 center{0.4, 0.0};
  const double radius = 0.03;
  const std::size_t n_surf = 6;
  for (std::size_t i = 0; i < n_surf; ++i) {
    const double a = 2.0 * M_PI * double(i) / double(n_surf);
    const Point2 n{std::cos(a), std::sin(a)};
    c.points.push_back({center.x + radius * n.x, center.y + radius * n.y});
    c.normals.push_back(n);
    c.wall_distance.push_back(0.0);
    c.surface_idx.push_back(i);
  }
  for (std::size_t i = 0; i < 24; ++i) {
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    const double r = rng.uniform(0.08, 1.2);
    c.points.push_back({center.x + r * std::cos(ang), center.y + r * std::sin(ang)});
    c.normals.push_back({0.0, 0.0});
    c.wall_distance.push_back(r - radius);
  }
  return c;
}

}  // namespace

GradCheckResult model_gradcheck(std::uint64_t seed) {
  const MeshCase c = toy_case(seed);

  ArchConfig arch;
  arch.kind = ModelKind::Surf2Vol;
  arch.hidden = 4;
  arch.mlp_depth = 1;
  arch.surf_layers = 1;
  arch.s2v_layers = 1;
  arch.k_neighbors = 3;

  FeatureConfig features;
  features.variant = FeatureVariant::Base;

  FieldNormalizer norm;  // identity
  ModelParams mp = init_model(arch, features, FieldId::VelX, norm, seed);
  const CaseTensors ct = build_case_tensors(c, mp);

  Rng trng(mix_seed(seed, hash_label("toy-targets"), 0));
  Tensor targets(c.points.size(), 1);
  for (double& v : targets.data) v = trng.uniform(-1.0, 1.0);

  std::vector<double> theta0;
  for (const NamedParam& blk : mp.blocks) {
    theta0.insert(theta0.end(), blk.value.data.begin(), blk.value.data.end());
  }
  const auto load_theta = [&mp](std::span<const double> th) {
    std::size_t off = 0;
    for (NamedParam& blk : mp.blocks) {
      std::copy_n(th.begin() + off, blk.value.size(), blk.value.data.begin());
      off += blk.value.size();
    }
  };

  // analytic pass
  Tape tape;
  std::vector<Tape::Id> pids;
  const Tape::Id out = model_forward(tape, mp, ct, true, &pids);
  const Tape::Id loss = tape.mse_loss(out, tape.input(targets));
  tape.backward(loss);
  std::vector<double> analytic;
  analytic.reserve(theta0.size());
  for (Tape::Id id : pids) {
    const Tensor& g = tape.grad(id);
    analytic.insert(analytic.end(), g.data.begin(), g.data.end());
  }

  const auto f = [&](std::span<const double> th) {
    load_theta(th);
    Tape t2;
    const Tape::Id o = model_forward(t2, mp, ct, false, nullptr);
    return t2.value(t2.mse_loss(o, t2.input(targets))).data[0];
  };
  GradCheckResult r;
  r.name = "surf2vol_toy30";
  r.max_rel_error = max_rel_grad_error(theta0, f, analytic);
  load_theta(theta0);  // restore
  return r;
}

bool gradcheck_detects_wrong_gradient(std::uint64_t seed) {
  Rng rng(mix_seed(seed, hash_label("negative-control"), 0));
  std::vector<double> theta = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
  const auto f = [](std::span<const double> th) { return th[0] * th[0] + 3.0 * th[1]; };
  // correct gradient is [2*theta0, 3]; corrupt one component by 1%
  const std::vector<double> wrong = {2.0 * theta[0] * 1.01, 3.0};
  return max_rel_grad_error(theta, f, wrong) > 1e-5;
}

}  // namespace geompnn
