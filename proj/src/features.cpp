#include "geompnn/features.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "geompnn/errors.hpp"
#include "geompnn/kdtree.hpp"

namespace geompnn {

namespace {

constexpr const char* kVariantNames[kNumVariants] = {"base", "trail", "polar",
                                                     "sine", "sph",   "inlet"};

}  // namespace

const char* variant_name(FeatureVariant v) { return kVariantNames[static_cast<int>(v)]; }

FeatureVariant parse_variant(std::string_view name) {
  for (std::size_t i = 0; i < kNumVariants; ++i) {
    if (name == kVariantNames[i]) return static_cast<FeatureVariant>(i);
  }
  throw data_error("unknown feature variant: " + std::string(name));
}

std::size_t node_feature_width(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::Base:
      return 8;
    case FeatureVariant::Trail:
      return 11;
    case FeatureVariant::Polar:
      return 19;
    case FeatureVariant::Sine:
      return 131;
    case FeatureVariant::SpH:
      return 251;
    case FeatureVariant::Inlet:
      return 449;
  }
  return 0;
}

std::size_t edge_feature_width(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::Base:
    case FeatureVariant::Trail:
      return 3;
    case FeatureVariant::Polar:
      return 7;
    case FeatureVariant::Sine:
      return 55;
    case FeatureVariant::SpH:
      return 115;
    case FeatureVariant::Inlet:
      return 213;
  }
  return 0;
}

SineBasisConfig default_sine_config(std::span<const MeshCase> cases) {
  if (cases.empty()) throw data_error("default_sine_config: no cases");
  std::vector<double> nn;
  double min_x = cases[0].points[0].x, max_x = min_x;
  double min_y = cases[0].points[0].y, max_y = min_y;
  for (const MeshCase& c : cases) {
    KdTree2 tree(c.points);
    for (const Point2& p : c.points) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
      auto two = tree.knn(p, 2);  // self plus nearest other point
      if (two.size() == 2) {
        const Point2& q = c.points[two[1]];
        nn.push_back(std::hypot(q.x - p.x, q.y - p.y));
      }
    }
  }
  if (nn.empty()) throw data_error("default_sine_config: single-point cases");
  std::sort(nn.begin(), nn.end());
  const std::size_t n = nn.size();
  const double median = (n % 2 == 1) ? nn[n / 2] : 0.5 * (nn[n / 2 - 1] + nn[n / 2]);
  SineBasisConfig cfg;
  cfg.s = median;
  cfg.L = std::hypot(max_x - min_x, max_y - min_y);
  if (!cfg.valid()) throw data_error("default_sine_config: degenerate scale");
  return cfg;
}

FeatureBuilder::FeatureBuilder(const MeshCase& c, const FeatureConfig& cfg)
    : case_(&c), cfg_(cfg), tables_(cfg.sph_n_basis, cfg.sph_factorial_norm) {
  trail_ = trailing_edge(c);
  if (cfg_.variant == FeatureVariant::Inlet) {
    rv_ = canonical_rotation(c.inlet_velocity);  // throws on a null velocity
  }
  if ((cfg_.variant == FeatureVariant::Sine || cfg_.variant == FeatureVariant::SpH ||
       cfg_.variant == FeatureVariant::Inlet) &&
      !cfg_.sine.valid()) {
    throw data_error("feature config: invalid sine basis scale");
  }
}

namespace {

// Writers advance a cursor through the output span; each returns the number
// of doubles written so offsets stay in one place.

std::size_t write_pe(double v, const SineBasisConfig& cfg, double* out) {
  sine_embed_into(v, cfg, out);
  return 2 * static_cast<std::size_t>(cfg.n_basis);
}

std::size_t write_pe_vec(const Point2& p, const SineBasisConfig& cfg, double* out) {
  sine_embed_vec_into(p, cfg, out);
  return 4 * static_cast<std::size_t>(cfg.n_basis);
}

std::size_t write_sph_angles(const Point2& p, const HarmonicTables& tables, double* out) {
  const std::array<double, 4> angles = four_axis_angles(p);
  const std::size_t per = 2 * static_cast<std::size_t>(tables.n_basis());
  for (int a = 0; a < 4; ++a) sph_embed_into(angles[a], tables, out + a * per);
  return 4 * per;
}

std::size_t write_angf(const Point2& p, double* out) {
  const std::array<double, 4> angles = four_axis_angles(p);
  std::copy(angles.begin(), angles.end(), out);
  return 4;
}

}  // namespace

void FeatureBuilder::node_features_into(std::size_t i, std::span<double> out) const {
  assert(out.size() == node_width());
  const Point2 x = case_->points[i];
  const Point2 n = case_->normals[i];
  const Point2 v = case_->inlet_velocity;
  const Point2 xt = x - trail_;
  double* p = out.data();

  // [x, n(x), v_inf, d(x), ||x||]
  *p++ = x.x;
  *p++ = x.y;
  *p++ = n.x;
  *p++ = n.y;
  *p++ = v.x;
  *p++ = v.y;
  *p++ = case_->wall_distance[i];
  *p++ = norm(x);
  if (cfg_.variant == FeatureVariant::Base) return;

  // [x_trail, ||x_trail||]
  *p++ = xt.x;
  *p++ = xt.y;
  *p++ = norm(xt);
  if (cfg_.variant == FeatureVariant::Trail) return;

  if (cfg_.variant == FeatureVariant::Polar || cfg_.variant == FeatureVariant::Sine) {
    p += write_angf(x, p);
    p += write_angf(xt, p);
    if (cfg_.variant == FeatureVariant::Polar) return;
  } else {
    // harmonic embeddings take the place of the raw angles
    p += write_sph_angles(x, tables_, p);
    p += write_sph_angles(xt, tables_, p);
  }

  // [PE(x), PE(x_trail), PE(d), PE(||x||), PE(||x_trail||)]
  p += write_pe_vec(x, cfg_.sine, p);
  p += write_pe_vec(xt, cfg_.sine, p);
  p += write_pe(case_->wall_distance[i], cfg_.sine, p);
  p += write_pe(norm(x), cfg_.sine, p);
  p += write_pe(norm(xt), cfg_.sine, p);
  if (cfg_.variant != FeatureVariant::Inlet) return;

  // canonicalized coordinates, normals and angles
  const Point2 cx = rv_.apply(x);
  const Point2 cxt = rv_.apply(xt);
  *p++ = cx.x;
  *p++ = cx.y;
  *p++ = cxt.x;
  *p++ = cxt.y;
  p += write_pe_vec(cx, cfg_.sine, p);
  p += write_pe_vec(cxt, cfg_.sine, p);
  const Point2 cn = rv_.apply(n);
  *p++ = cn.x;
  *p++ = cn.y;
  p += write_sph_angles(cx, tables_, p);
  p += write_sph_angles(cxt, tables_, p);
  assert(p == out.data() + out.size());
}

std::vector<double> FeatureBuilder::node_features(std::size_t i) const {
  std::vector<double> out(node_width());
  node_features_into(i, out);
  return out;
}

void FeatureBuilder::edge_features_into(const Point2& y, const Point2& x,
                                        std::span<double> out) const {
  assert(out.size() == edge_width());
  const Point2 disp = y - x;
  double* p = out.data();

  // [y - x, ||y - x||]
  *p++ = disp.x;
  *p++ = disp.y;
  *p++ = norm(disp);
  if (cfg_.variant == FeatureVariant::Base || cfg_.variant == FeatureVariant::Trail) return;

  if (cfg_.variant == FeatureVariant::Polar || cfg_.variant == FeatureVariant::Sine) {
    p += write_angf(disp, p);
    if (cfg_.variant == FeatureVariant::Polar) return;
  } else {
    p += write_sph_angles(disp, tables_, p);
  }

  // [PE(||y - x||), PE(y - x)]
  p += write_pe(norm(disp), cfg_.sine, p);
  p += write_pe_vec(disp, cfg_.sine, p);
  if (cfg_.variant != FeatureVariant::Inlet) return;

  const Point2 cd = rv_.apply(disp);
  *p++ = cd.x;
  *p++ = cd.y;
  p += write_pe_vec(cd, cfg_.sine, p);
  p += write_sph_angles(cd, tables_, p);
  assert(p == out.data() + out.size());
}

std::vector<double> FeatureBuilder::edge_features(const Point2& y, const Point2& x) const {
  std::vector<double> out(edge_width());
  edge_features_into(y, x, out);
  return out;
}

Tensor FeatureBuilder::node_matrix(bool parallel) const {
  const std::size_t n = case_->points.size();
  const std::size_t w = node_width();
  Tensor t(n, w);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      node_features_into(static_cast<std::size_t>(i),
                         {t.data.data() + static_cast<std::size_t>(i) * w, w});
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      node_features_into(i, {t.data.data() + i * w, w});
    }
  }
  return t;
}

Tensor FeatureBuilder::node_matrix_serial() const { return node_matrix(false); }

Tensor FeatureBuilder::node_matrix_rows(std::span<const std::size_t> idx, bool parallel) const {
  const std::size_t w = node_width();
  Tensor t(idx.size(), w);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < static_cast<long long>(idx.size()); ++r) {
      node_features_into(idx[static_cast<std::size_t>(r)],
                         {t.data.data() + static_cast<std::size_t>(r) * w, w});
    }
  } else {
    for (std::size_t r = 0; r < idx.size(); ++r) {
      node_features_into(idx[r], {t.data.data() + r * w, w});
    }
  }
  return t;
}

Tensor FeatureBuilder::edge_matrix(const BipartiteGraph& g, bool parallel) const {
  const std::size_t w = edge_width();
  Tensor t(g.edges.size(), w);
  const auto fill = [&](std::size_t e) {
    const Point2 y = case_->points[g.surface_nodes[g.edges[e].src]];
    const Point2 x = case_->points[g.edges[e].dst];
    edge_features_into(y, x, {t.data.data() + e * w, w});
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long long e = 0; e < static_cast<long long>(g.edges.size()); ++e) {
      fill(static_cast<std::size_t>(e));
    }
  } else {
    for (std::size_t e = 0; e < g.edges.size(); ++e) fill(e);
  }
  return t;
}

Tensor FeatureBuilder::edge_matrix_serial(const BipartiteGraph& g) const {
  return edge_matrix(g, false);
}

Tensor FeatureBuilder::surface_edge_matrix(const NeighborGraph& g) const {
  Tensor t(g.edges.size(), kSurfaceEdgeWidth);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    t.data[e * 3 + 0] = g.edge_geom[e][0];
    t.data[e * 3 + 1] = g.edge_geom[e][1];
    t.data[e * 3 + 2] = g.edge_geom[e][2];
  }
  return t;
}

double log_pressure(double p) { return std::copysign(std::log1p(std::abs(p)), p); }

double inv_log_pressure(double q) { return std::copysign(std::expm1(std::abs(q)), q); }

double FieldNormalizer::transform(double raw) const {
  const double v = log_transform ? log_pressure(raw) : raw;
  return (v - mean) / std;
}

double FieldNormalizer::inverse(double normalized) const {
  const double v = normalized * std + mean;
  return log_transform ? inv_log_pressure(v) : v;
}

FieldNormalizer fit_normalizer(std::span<const double> raw_values, bool log_transform) {
  if (raw_values.size() < 2) throw data_error("fit_normalizer: need at least two values");
  std::vector<double> vals(raw_values.begin(), raw_values.end());
  if (log_transform) {
    for (double& v : vals) v = log_pressure(v);
  }
  double sum = 0.0;
  for (double v : vals) sum += v;
  const double mean = sum / double(vals.size());
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  const double var = ss / double(vals.size());
  if (var <= 0.0) throw data_error("fit_normalizer: zero variance");
  FieldNormalizer n;
  n.mean = mean;
  n.std = std::sqrt(var);
  n.log_transform = log_transform;
  return n;
}

void dump_features(std::ostream& os, const MeshCase& c, const FeatureBuilder& fb) {
  std::vector<double> row(fb.node_width());
  char buf[32];
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    fb.node_features_into(i, row);
    os << c.case_id << ' ' << i;
    for (double v : row) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << ' ' << buf;
    }
    os << '\n';
  }
}

}  // namespace geompnn
