#include "geompnn/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "geompnn/errors.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/tape.hpp"

namespace geompnn {

double mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw data_error("mse: length mismatch");
  if (predictions.empty()) throw data_error("mse: empty inputs");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    acc += d * d;
  }
  return acc / double(predictions.size());
}

FieldMse mse_field(const Tensor& pred_normalized, const MeshCase& c, FieldId field,
                   const FieldNormalizer& norm) {
  if (!c.targets) throw data_error("mse_field: case " + c.case_id + " has no targets");
  if (pred_normalized.rows != c.points.size() || pred_normalized.cols != 1) {
    throw data_error("mse_field: prediction shape mismatch for " + c.case_id);
  }
  const int col = static_cast<int>(field);
  std::vector<double> tgt_norm(c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    tgt_norm[i] = norm.transform((*c.targets)[i][col]);
  }
  FieldMse out;
  out.normalized = mse(pred_normalized.data, tgt_norm);
  if (field == FieldId::Pressure && norm.log_transform) {
    std::vector<double> pred_raw(c.points.size()), tgt_raw(c.points.size());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      pred_raw[i] = norm.inverse(pred_normalized.data[i]);
      tgt_raw[i] = (*c.targets)[i][col];
    }
    out.raw_pressure = mse(pred_raw, tgt_raw);
  }
  return out;
}

ShiftResult resolution_shift(const ModelParams& mp, const MeshCase& c, std::size_t n_sub,
                             std::uint64_t seed) {
  ShiftResult r;
  const Tensor pred_full = predict(mp, c);
  r.epsilon_full = mse_field(pred_full, c, mp.field, mp.normalizer).normalized;
  const SubsampleResult sub = subsample(c, n_sub, seed);
  const Tensor pred_sub = predict(mp, sub.sampled);
  r.epsilon_sub = mse_field(pred_sub, sub.sampled, mp.field, mp.normalizer).normalized;
  if (r.epsilon_sub > 0.0) {
    r.ratio = (r.epsilon_full - r.epsilon_sub) / r.epsilon_sub;
    r.defined = true;
  }
  return r;
}

EvalReport evaluate(const std::vector<ModelParams>& models, const std::vector<MeshCase>& cases,
                    std::size_t n_sub, std::uint64_t seed, bool timing) {
  if (cases.empty()) throw data_error("evaluate: no cases");
  for (const ModelParams& a : models) {
    for (const ModelParams& b : models) {
      if (a.field == b.field &&
          (a.normalizer.mean != b.normalizer.mean || a.normalizer.std != b.normalizer.std ||
           a.normalizer.log_transform != b.normalizer.log_transform)) {
        throw data_error("evaluate: normalizer mismatch between checkpoints for field " +
                         std::string(field_name(a.field)));
      }
    }
  }

  using clock = std::chrono::steady_clock;
  EvalReport report;
  report.n_sub = n_sub;
  for (const ModelParams& mp : models) {
    EvalRow row;
    row.variant = mp.features.variant;
    row.field = mp.field;
    double full_sum = 0.0, sub_sum = 0.0, raw_sum = 0.0;
    bool any_raw = false;
    for (const MeshCase& c : cases) {
      const auto g0 = clock::now();
      const CaseTensors ct = build_case_tensors(c, mp);
      const auto g1 = clock::now();
      Tape tape;
      const Tape::Id out = model_forward(tape, mp, ct, false, nullptr);
      const auto g2 = clock::now();
      if (timing) {
        row.graph_ms += std::chrono::duration<double, std::milli>(g1 - g0).count();
        row.forward_ms += std::chrono::duration<double, std::milli>(g2 - g1).count();
      }
      const FieldMse fm = mse_field(tape.value(out), c, mp.field, mp.normalizer);
      full_sum += fm.normalized;
      row.per_case.emplace_back(c.case_id, fm.normalized);
      if (fm.raw_pressure) {
        raw_sum += *fm.raw_pressure;
        any_raw = true;
      }

      const SubsampleResult sub = subsample(c, n_sub, mix_seed(seed, hash_label("eval-sub"), 0));
      const Tensor pred_sub = predict(mp, sub.sampled);
      sub_sum += mse_field(pred_sub, sub.sampled, mp.field, mp.normalizer).normalized;
    }
    row.mse_full = full_sum / double(cases.size());
    row.mse_sub = sub_sum / double(cases.size());
    if (row.mse_sub > 0.0) {
      row.reldiff = (row.mse_full - row.mse_sub) / row.mse_sub;
      row.reldiff_defined = true;
    }
    if (any_raw) row.mse_full_raw_pressure = raw_sum / double(cases.size());
    report.rows.push_back(std::move(row));
  }

  std::stable_sort(report.rows.begin(), report.rows.end(), [](const EvalRow& a, const EvalRow& b) {
    if (a.variant != b.variant) return a.variant < b.variant;
    return a.field < b.field;
  });
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_report_text(std::ostream& os, const EvalReport& report) {
  os << "evaluation report (subsample n = " << report.n_sub << ")\n";
  os << "variant field mse_full mse_sub reldiff raw_pressure_mse\n";
  for (const EvalRow& row : report.rows) {
    os << variant_name(row.variant) << ' ' << field_name(row.field) << ' ' << fmt(row.mse_full)
       << ' ' << fmt(row.mse_sub) << ' ' << (row.reldiff_defined ? fmt(row.reldiff) : "undefined")
       << ' ' << (row.mse_full_raw_pressure ? fmt(*row.mse_full_raw_pressure) : "-") << '\n';
    for (const auto& [case_id, case_mse] : row.per_case) {
      os << "  case " << case_id << ' ' << fmt(case_mse) << '\n';
    }
  }
}

void write_report_machine(std::ostream& os, const EvalReport& report) {
  for (const EvalRow& row : report.rows) {
    os << variant_name(row.variant) << ' ' << field_name(row.field) << ' ' << fmt(row.mse_full)
       << ' ' << fmt(row.mse_sub) << ' ' << (row.reldiff_defined ? fmt(row.reldiff) : "nan") << ' '
       << fmt(row.forward_ms) << '\n';
  }
}

}  // namespace geompnn
