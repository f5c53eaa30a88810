#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geompnn/net.hpp"

namespace geompnn {

/// Mean of squared differences. The independent two-pass oracle in the tests
/// must agree within 1e-12.
double mse(std::span<const double> predictions, std::span<const double> targets);

/// Normalized-space MSE of a prediction column against a case's targets;
/// for log-compressed pressure also the MSE of the decompressed raw
/// pressures.
struct FieldMse {
  double normalized = 0.0;
  std::optional<double> raw_pressure;
};
FieldMse mse_field(const Tensor& pred_normalized, const MeshCase& c, FieldId field,
                   const FieldNormalizer& norm);

/// Full-mesh vs subsampled-mesh error ratio (epsilon_full - epsilon_sub) /
/// epsilon_sub for one case. `defined` is false when epsilon_sub == 0.
struct ShiftResult {
  double epsilon_full = 0.0;
  double epsilon_sub = 0.0;
  double ratio = 0.0;
  bool defined = false;
};
ShiftResult resolution_shift(const ModelParams& mp, const MeshCase& c, std::size_t n_sub,
                             std::uint64_t seed);

struct EvalRow {
  FeatureVariant variant = FeatureVariant::Base;
  FieldId field = FieldId::VelX;
  double mse_full = 0.0;  // mean over cases, normalized space
  double mse_sub = 0.0;
  double reldiff = 0.0;
  bool reldiff_defined = false;
  std::optional<double> mse_full_raw_pressure;
  double forward_ms = 0.0;  // 0 unless timing was requested
  double graph_ms = 0.0;
  std::vector<std::pair<std::string, double>> per_case;  // case_id -> full-mesh mse
};

struct EvalReport {
  std::size_t n_sub = 0;
  std::vector<EvalRow> rows;  // sorted by (variant, field)
};

/// Evaluates each checkpoint over the cases: full-mesh MSE per case, the
/// aggregate, the subsample aggregate, and their relative difference.
/// Checkpoints for the same field must share a normalizer. Never mutates the
/// models. `timing` turns on wall-clock measurement (off keeps reports
/// byte-reproducible).
EvalReport evaluate(const std::vector<ModelParams>& models, const std::vector<MeshCase>& cases,
                    std::size_t n_sub, std::uint64_t seed, bool timing);

/// Human-readable table (includes the raw-pressure column when present).
void write_report_text(std::ostream& os, const EvalReport& report);
/// One `variant field mse_full mse_sub reldiff time_ms` line per row.
void write_report_machine(std::ostream& os, const EvalReport& report);

}  // namespace geompnn
