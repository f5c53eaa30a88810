#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "geompnn/basis.hpp"
#include "geompnn/geom.hpp"
#include "geompnn/graph.hpp"
#include "geompnn/mesh.hpp"
#include "geompnn/tensor.hpp"

namespace geompnn {

/// Input feature variants, ordered by inclusion. Each extends the previous
/// one, except SpH which swaps the raw angle block for harmonic embeddings.
enum class FeatureVariant { Base, Trail, Polar, Sine, SpH, Inlet };

inline constexpr std::size_t kNumVariants = 6;

const char* variant_name(FeatureVariant v);
FeatureVariant parse_variant(std::string_view name);  // throws data_error

/// Node feature widths: 8 / 11 / 19 / 131 / 251 / 449.
std::size_t node_feature_width(FeatureVariant v);
/// Surface-to-volume edge feature widths: 3 / 3 / 7 / 55 / 115 / 213.
std::size_t edge_feature_width(FeatureVariant v);
/// Surface-graph edges always carry [dx, dy, dist] regardless of variant.
inline constexpr std::size_t kSurfaceEdgeWidth = 3;

/// Everything needed to evaluate features beyond the case itself. The sine
/// scale parameters are dataset-level constants (see default_sine_config) and
/// travel with checkpoints.
struct FeatureConfig {
  FeatureVariant variant = FeatureVariant::Base;
  SineBasisConfig sine{};
  int sph_n_basis = 8;
  bool sph_factorial_norm = false;
};

/// Fits the sine embedding scale to a training set: s = median over all
/// points of the nearest-neighbor distance, L = diagonal of the union
/// bounding box.
SineBasisConfig default_sine_config(std::span<const MeshCase> cases);

/// Assembles node and edge feature vectors for one case. Per-point features
/// depend only on that point plus case-level data (trailing edge, inlet
/// velocity), so any subset of volume points yields the same rows as the
/// full mesh.
class FeatureBuilder {
 public:
  FeatureBuilder(const MeshCase& c, const FeatureConfig& cfg);

  std::size_t node_width() const { return node_feature_width(cfg_.variant); }
  std::size_t edge_width() const { return edge_feature_width(cfg_.variant); }
  const FeatureConfig& config() const { return cfg_; }
  const Point2& trailing() const { return trail_; }

  void node_features_into(std::size_t i, std::span<double> out) const;
  std::vector<double> node_features(std::size_t i) const;

  /// Features of a directed edge from surface point y to volume point x.
  void edge_features_into(const Point2& y, const Point2& x, std::span<double> out) const;
  std::vector<double> edge_features(const Point2& y, const Point2& x) const;

  /// One row per mesh point (OpenMP over points; serial twin for tests).
  Tensor node_matrix(bool parallel = true) const;
  Tensor node_matrix_serial() const;
  /// Rows for an explicit point subset, e.g. the surface.
  Tensor node_matrix_rows(std::span<const std::size_t> idx, bool parallel = true) const;

  /// One row per bipartite edge, in graph edge order.
  Tensor edge_matrix(const BipartiteGraph& g, bool parallel = true) const;
  Tensor edge_matrix_serial(const BipartiteGraph& g) const;

  /// Surface-graph edge rows are the stored [dx, dy, dist] triples.
  Tensor surface_edge_matrix(const NeighborGraph& g) const;

 private:
  const MeshCase* case_;
  FeatureConfig cfg_;
  Point2 trail_{};
  Rotation2 rv_{};  // identity unless variant == Inlet
  HarmonicTables tables_;
};

/// Sign-preserving log compression of gauge pressure: q = sign(p)*log(|p|+1).
double log_pressure(double p);
/// Inverse: p = sign(q)*(exp(|q|)-1).
double inv_log_pressure(double q);

/// Affine (and optionally log-compressed) target transform fitted on the
/// training set so transformed targets have mean 0 and population std 1.
struct FieldNormalizer {
  double mean = 0.0;
  double std = 1.0;
  bool log_transform = false;

  /// raw target -> normalized training-space value
  double transform(double raw) const;
  /// normalized value -> raw target
  double inverse(double normalized) const;
};

/// Population statistics (divide by N). Throws data_error on fewer than two
/// values or zero variance.
FieldNormalizer fit_normalizer(std::span<const double> raw_values, bool log_transform);

/// Writes `case_id point_idx f1 ... fD` rows for every mesh point.
void dump_features(std::ostream& os, const MeshCase& c, const FeatureBuilder& fb);

}  // namespace geompnn
