// End-to-end pass/fail checks for the toolkit's core guarantees. Each check
// prints exactly one line; the binary exits nonzero if any selected check
// fails. `--only N` restricts to one check, `--cli PATH` points at the
// command-line binary for the pipeline reproducibility check.
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "geompnn/basis.hpp"
#include "geompnn/eval.hpp"
#include "geompnn/features.hpp"
#include "geompnn/geom.hpp"
#include "geompnn/gradcheck.hpp"
#include "geompnn/graph.hpp"
#include "geompnn/kdtree.hpp"
#include "geompnn/mesh.hpp"
#include "geompnn/net.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/synthetic.hpp"
#include "geompnn/train.hpp"

using namespace geompnn;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

FeatureConfig cfg_for(FeatureVariant v, double s = 0.05, double L = 3.0) {
  FeatureConfig cfg;
  cfg.variant = v;
  cfg.sine.s = s;
  cfg.sine.L = L;
  return cfg;
}

// ---------------------------------------------------------------------------
// 1. Feature vector widths across the variant ladder.
bool c1_feature_widths(std::string& detail) {
  struct Row {
    FeatureVariant v;
    std::size_t node, edge;
  };
  const std::array<Row, 6> expect{{{FeatureVariant::Base, 8, 3},
                                   {FeatureVariant::Trail, 11, 3},
                                   {FeatureVariant::Polar, 19, 7},
                                   {FeatureVariant::Sine, 131, 55},
                                   {FeatureVariant::SpH, 251, 115},
                                   {FeatureVariant::Inlet, 449, 213}}};
  if (kSurfaceEdgeWidth != 3) {
    detail = "surface edge width != 3";
    return false;
  }
  GenerateConfig gc;
  gc.n_surface = 40;
  gc.n_volume = 60;
  const MeshCase c = generate_case(JoukowskiParams{}, gc, 3, "widths");
  const BipartiteGraph s2v = surf2vol_graph(c, 4, false);
  std::vector<Point2> surf_pts;
  for (std::size_t i : c.surface_idx) surf_pts.push_back(c.points[i]);
  const NeighborGraph sg = radius_graph(surf_pts, 0.2, 8, 0, false);
  for (const Row& r : expect) {
    if (node_feature_width(r.v) != r.node || edge_feature_width(r.v) != r.edge) {
      detail = std::string("declared width mismatch for ") + variant_name(r.v);
      return false;
    }
    const FeatureBuilder fb(c, cfg_for(r.v));
    if (fb.node_matrix(false).cols != r.node) {
      detail = std::string("built node width mismatch for ") + variant_name(r.v);
      return false;
    }
    if (fb.edge_matrix(s2v, false).cols != r.edge) {
      detail = std::string("built edge width mismatch for ") + variant_name(r.v);
      return false;
    }
    if (fb.surface_edge_matrix(sg).cols != kSurfaceEdgeWidth) {
      detail = std::string("built surface edge width mismatch for ") + variant_name(r.v);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 2. Inlet canonicalization: the fitted rotation sends v_inf to (|v|, 0).
bool c2_canonicalization(std::string& detail) {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double speed = rng.uniform(1e-3, 100.0);
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point2 v{speed * std::cos(ang), speed * std::sin(ang)};
    const double mag = std::hypot(v.x, v.y);
    const Rotation2 R = canonical_rotation(v);
    const Point2 q = R.apply(v);
    const double scale = std::max(1.0, mag);
    worst = std::max(worst, std::abs(q.x - mag) / scale);
    worst = std::max(worst, std::abs(q.y) / scale);
    // the rotation must be a proper isometry
    const double det = R.m[0] * R.m[3] - R.m[1] * R.m[2];
    worst = std::max(worst, std::abs(det - 1.0));
    worst = std::max(worst, std::abs(R.m[0] * R.m[1] + R.m[2] * R.m[3]));
    worst = std::max(worst, std::abs(R.m[0] * R.m[0] + R.m[2] * R.m[2] - 1.0));
  }
  detail = fmt("max deviation %.3e", worst);
  return worst <= 1e-12;
}

// ---------------------------------------------------------------------------
// 3. Signed log compression of pressure inverts to 1e-9 over a wide range.
bool c3_log_pressure_roundtrip(std::string& detail) {
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double p;
    const int mode = int(rng.uniform_index(3));
    if (mode == 0) {
      p = rng.uniform(-2e3, 2e3);  // typical dynamic-pressure magnitudes
    } else {
      const double mag = std::pow(10.0, rng.uniform(-9.0, 6.0));
      p = (mode == 1) ? mag : -mag;
    }
    const double back = inv_log_pressure(log_pressure(p));
    worst = std::max(worst, std::abs(back - p));
  }
  const double z = inv_log_pressure(log_pressure(0.0));
  worst = std::max(worst, std::abs(z));
  detail = fmt("max |p - inv(fwd(p))| = %.3e", worst);
  return worst < 1e-9;
}

// ---------------------------------------------------------------------------
// 4. Spatial index agrees exactly with brute force on random clouds.
bool c4_kdtree_exact(std::string& detail) {
  Rng rng(4);
  for (int cloud = 0; cloud < 20; ++cloud) {
    std::vector<Point2> pts(1000);
    for (Point2& p : pts) p = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const KdTree2 tree(pts);
    for (int q = 0; q < 50; ++q) {
      const Point2 query{rng.uniform(-3.5, 3.5), rng.uniform(-3.5, 3.5)};
      if (tree.knn(query, 8) != brute_force_knn(pts, query, 8)) {
        detail = fmt("knn mismatch on cloud %g query %g", cloud, q);
        return false;
      }
      const double r = rng.uniform(0.05, 0.5);
      if (tree.radius(query, r) != brute_force_radius(pts, query, r)) {
        detail = fmt("radius mismatch on cloud %g query %g", cloud, q);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 5. Surface-driven predictions are resolution-independent on a large case.
bool c5_resolution_independence(std::string& detail) {
  GenerateConfig gc;
  gc.n_surface = 200;
  gc.n_volume = 8000;
  const MeshCase c = generate_case(JoukowskiParams{}, gc, 31, "bigcase");
  ArchConfig arch;
  arch.kind = ModelKind::Surf2Vol;
  arch.hidden = 16;
  arch.mlp_depth = 1;
  arch.surf_layers = 2;
  arch.s2v_layers = 2;
  const ModelParams mp = init_model(arch, cfg_for(FeatureVariant::Base), FieldId::VelX, {}, 2);

  const SubsampleResult sub = subsample(c, c.surface_idx.size() + 2000, 5);
  const Tensor p_full = predict(mp, c);
  const Tensor p_sub = predict(mp, sub.sampled);
  double row_diff = 0.0;
  for (std::size_t i = 0; i < p_sub.rows; ++i)
    row_diff = std::max(row_diff, std::abs(p_sub.at(i, 0) - p_full.at(sub.index_map[i], 0)));

  const ShiftResult shift = resolution_shift(mp, c, c.size() / 4, 9);
  detail = fmt("row diff %.1e, error shift %.4f", row_diff, shift.ratio);
  return row_diff <= 1e-12 && shift.defined && std::abs(shift.ratio) < 0.05;
}

// ---------------------------------------------------------------------------
// 6. Analytic gradients match finite differences for primitives and model.
bool c6_gradients(std::string& detail) {
  double worst = 0.0;
  std::string worst_name;
  for (const GradCheckResult& r : primitive_gradchecks(6)) {
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_name = r.name;
    }
    if (!r.passed(1e-5)) {
      detail = r.name + fmt(" rel error %.3e", r.max_rel_error);
      return false;
    }
  }
  const GradCheckResult m = model_gradcheck(6);
  if (!m.passed(1e-5)) {
    detail = m.name + fmt(" rel error %.3e", m.max_rel_error);
    return false;
  }
  if (!gradcheck_detects_wrong_gradient(6)) {
    detail = "negative control failed to detect a corrupted gradient";
    return false;
  }
  worst = std::max(worst, m.max_rel_error);
  detail = fmt("max rel error %.3e", worst) + " (" +
           (m.max_rel_error >= worst ? m.name : worst_name) + ")";
  return true;
}

// ---------------------------------------------------------------------------
// 7. Basis functions: interleaved sine layout and Legendre consistency.
bool c7_bases(std::string& detail) {
  SineBasisConfig sc;
  sc.s = 0.05;
  sc.L = 3.0;
  const std::vector<double> at0 = sine_embed(0.0, sc);
  for (std::size_t i = 0; i < at0.size(); i += 2) {
    if (at0[i] != 0.0 || at0[i + 1] != 1.0) {
      detail = "embedding of 0 is not [0, 1, 0, 1, ...]";
      return false;
    }
  }
  double worst = 0.0;
  for (int l = 1; l <= 7; ++l) {
    for (int i = 0; i < 1000; ++i) {
      const double u = -1.0 + 2.0 * double(i) / 999.0;
      const double lhs = double(l + 1) * HarmonicTables::legendre(l + 1, u);
      const double rhs = double(2 * l + 1) * u * HarmonicTables::legendre(l, u) -
                         double(l) * HarmonicTables::legendre(l - 1, u);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  if (worst >= 1e-9) {
    detail = fmt("recurrence residual %.3e", worst);
    return false;
  }
  // parity over the angle grid: even harmonics are mirror-symmetric, odd
  // harmonics of odd order flip sign, so reflections are distinguishable
  const HarmonicTables t(8);
  double parity = 0.0;
  bool distinguishes = false;
  for (int i = 0; i < 1000; ++i) {
    const double th = -std::numbers::pi + 2.0 * std::numbers::pi * double(i) / 999.0;
    for (int l = 1; l <= 8; ++l) {
      parity = std::max(parity, std::abs(t.even(l, th) - t.even(l, -th)));
      const double sign = (l % 2 == 0) ? 1.0 : -1.0;
      parity = std::max(parity, std::abs(t.odd(l, -th) - sign * t.odd(l, th)));
      if (std::abs(t.odd(l, th) - t.odd(l, -th)) > 1e-3) distinguishes = true;
    }
  }
  if (parity >= 1e-9) {
    detail = fmt("parity residual %.3e", parity);
    return false;
  }
  if (!distinguishes) {
    detail = "odd harmonics never separated an angle from its mirror";
    return false;
  }
  detail = fmt("recurrence %.1e, parity %.1e", worst, parity);
  return true;
}

// ---------------------------------------------------------------------------
// 8. A desk-scale training run converges and replays bit-identically.
bool c8_training(std::string& detail) {
  Rng prng(101);
  const ParamRanges ranges;
  GenerateConfig gc;  // 200 surface + 7800 volume points
  std::vector<MeshCase> cases;
  for (int i = 0; i < 8; ++i) {
    const JoukowskiParams p = sample_params(ranges, prng);
    cases.push_back(generate_case(p, gc, 1000 + i, "train" + std::to_string(i)));
  }
  FeatureConfig feats;
  feats.variant = FeatureVariant::SpH;
  feats.sine = default_sine_config(cases);
  ArchConfig arch;
  arch.kind = ModelKind::Surf2Vol;
  arch.hidden = 32;
  arch.mlp_depth = 1;
  arch.surf_layers = 2;
  arch.s2v_layers = 2;
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.subsample_n = 800;
  cfg.seed = 7;
  cfg.field = FieldId::VelX;

  const TrainResult r1 = train_field(cases, arch, feats, cfg);
  if (r1.diverged) {
    detail = "first run diverged: " + r1.diagnostic;
    return false;
  }
  const TrainResult r2 = train_field(cases, arch, feats, cfg);
  if (r2.diverged) {
    detail = "second run diverged: " + r2.diagnostic;
    return false;
  }
  if (r1.history.size() != cfg.epochs || r2.history.size() != cfg.epochs) {
    detail = "missing epochs in history";
    return false;
  }
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    if (r1.history[i].mse != r2.history[i].mse || r1.history[i].lr != r2.history[i].lr) {
      detail = fmt("replay diverged at epoch %g", double(i + 1));
      return false;
    }
  }
  if (params_hash(r1.model) != params_hash(r2.model)) {
    detail = "replayed weights differ";
    return false;
  }
  const double first = r1.history.front().mse;
  const double last = r1.history.back().mse;
  detail = fmt("epoch-1 mse %.4g, final %.4g, ratio %.4f", first, last, last / first);
  return last <= 0.2 * first;
}

// ---------------------------------------------------------------------------
// 9. Log compression reduces the variance of wide-range pressure targets.
bool c9_pressure_variance(std::string& detail) {
  const auto variance = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / double(v.size());
  };
  Rng prng(9);
  const ParamRanges ranges;
  GenerateConfig gc;
  gc.n_surface = 80;
  gc.n_volume = 400;
  for (int i = 0; i < 5; ++i) {
    JoukowskiParams p = sample_params(ranges, prng);
    p.speed = 30.0 + 4.0 * double(i);  // dynamic pressure far above e
    const MeshCase c = generate_case(p, gc, 90 + i, "pvar");
    std::vector<double> raw, compressed;
    double peak = 0.0;
    for (const TargetRow& row : *c.targets) {
      raw.push_back(row[2]);
      compressed.push_back(log_pressure(row[2]));
      peak = std::max(peak, std::abs(row[2]));
    }
    if (peak <= std::numbers::e) {
      detail = "case never exceeded the compression knee";
      return false;
    }
    const double vr = variance(raw), vc = variance(compressed);
    if (!(vc < vr)) {
      detail = fmt("variance grew: raw %.4g -> compressed %.4g", vr, vc);
      return false;
    }
    if (i == 4) detail = fmt("raw var %.4g -> compressed %.4g", vr, vc);
  }
  return true;
}

// ---------------------------------------------------------------------------
// 10. The command-line pipeline replays byte-identically from its seeds.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run_quiet(const std::string& cmd) {
  return std::system((cmd + " > /dev/null 2>&1").c_str()) == 0;
}

bool c10_cli_reproducible(std::string& detail) {
  if (g_cli_path.empty()) {
    detail = "requires --cli <path to the command-line binary>";
    return false;
  }
  const fs::path root = fs::temp_directory_path() / "geompnn_accept10";
  std::error_code ec;
  fs::remove_all(root, ec);
  for (const char* leg : {"A", "B"}) {
    const fs::path d = root / leg;
    fs::create_directories(d);
    const std::string data = (d / "data").string();
    const std::string run = (d / "run").string();
    const std::string ev = (d / "eval").string();
    if (!run_quiet(g_cli_path + " generate --out " + data +
                   " --seed 5 --count 3 --n-surface 80 --n-volume 300")) {
      detail = std::string("generate failed in leg ") + leg;
      return false;
    }
    if (!run_quiet(g_cli_path + " train --manifest " + data + "/train.txt --out " + run +
                   " --field ux --variant sph --model surf2vol --epochs 5 --subsample-n 150"
                   " --seed 3 --hidden 16 --mlp-depth 1 --surf-layers 1 --s2v-layers 1"
                   " --k-neighbors 4")) {
      detail = std::string("train failed in leg ") + leg;
      return false;
    }
    if (!run_quiet(g_cli_path + " eval --manifest " + data + "/test.txt --checkpoint " + run +
                   "/ux_sph.ckpt --out " + ev + " --subsample-n 100 --seed 2")) {
      detail = std::string("eval failed in leg ") + leg;
      return false;
    }
  }
  const std::string histA = slurp(root / "A/run/ux_sph_history.txt");
  const std::string histB = slurp(root / "B/run/ux_sph_history.txt");
  if (histA.empty()) {
    detail = "empty training history";
    return false;
  }
  if (histA != histB) {
    detail = "training histories differ between replays";
    return false;
  }
  for (const char* name : {"report.txt", "report_machine.txt"}) {
    const std::string a = slurp(root / "A/eval" / name);
    const std::string b = slurp(root / "B/eval" / name);
    if (a.empty()) {
      detail = std::string("empty ") + name;
      return false;
    }
    if (a != b) {
      detail = std::string(name) + " differs between replays";
      return false;
    }
  }
  fs::remove_all(root, ec);
  return true;
}

struct Criterion {
  int id;
  const char* label;
  bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "feature widths across the variant ladder", c1_feature_widths},
    {2, "inlet canonicalization to the positive x-axis", c2_canonicalization},
    {3, "signed log pressure compression round-trip", c3_log_pressure_roundtrip},
    {4, "spatial index matches brute force exactly", c4_kdtree_exact},
    {5, "predictions independent of volume resolution", c5_resolution_independence},
    {6, "analytic gradients match finite differences", c6_gradients},
    {7, "sine and harmonic angle bases behave as declared", c7_bases},
    {8, "training converges and replays bit-identically", c8_training},
    {9, "log compression shrinks pressure variance", c9_pressure_variance},
    {10, "command-line pipeline replays byte-identically", c10_cli_reproducible},
};

}  // namespace

int main(int argc, char** argv) {
  int only = -1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--cli" && i + 1 < argc) {
      g_cli_path = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--only N] [--cli PATH]\n", argv[0]);
      return 2;
    }
  }
  bool all_ok = true;
  for (const Criterion& c : kCriteria) {
    if (only > 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d  %-52s %s%s%s\n", c.id, c.label, ok ? "PASS" : "FAIL",
                detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
