#include "geompnn/train.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "geompnn/errors.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/tape.hpp"

namespace geompnn {

AdamState make_adam_state(const ModelParams& mp) {
  AdamState st;
  st.m.reserve(mp.blocks.size());
  st.v.reserve(mp.blocks.size());
  for (const NamedParam& blk : mp.blocks) {
    st.m.emplace_back(blk.value.rows, blk.value.cols);
    st.v.emplace_back(blk.value.rows, blk.value.cols);
  }
  return st;
}

void adam_step(ModelParams& mp, const std::vector<const Tensor*>& grads, AdamState& st, double lr,
               const TrainConfig& cfg) {
  if (grads.size() != mp.blocks.size()) throw std::invalid_argument("adam_step: grad count");
  for (std::size_t b = 0; b < grads.size(); ++b) {
    if (!all_finite(*grads[b])) {
      throw numerical_error("adam_step: non-finite gradient in block " + mp.blocks[b].name);
    }
  }
  st.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(st.t));
  for (std::size_t b = 0; b < grads.size(); ++b) {
    Tensor& w = mp.blocks[b].value;
    const Tensor& g = *grads[b];
    Tensor& m = st.m[b];
    Tensor& v = st.v[b];
    assert(g.same_shape(w));
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      w.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

double onecycle_lr(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  assert(step < total_steps);
  const double lr0 = cfg.max_lr / cfg.div;
  const double lr_final = cfg.max_lr / cfg.final_div;
  if (total_steps == 1) return cfg.max_lr;
  const std::size_t last = total_steps - 1;
  std::size_t warm = static_cast<std::size_t>(std::llround(cfg.warmup_frac * double(last)));
  warm = std::max<std::size_t>(1, std::min(warm, last));
  // Exact values at the three anchor steps.
  if (step == warm) return cfg.max_lr;
  if (step == 0) return lr0;
  if (step == last) return lr_final;
  const auto blend = [&cfg](double from, double to, double t) {
    if (cfg.ramp == RampShape::Linear) return from + (to - from) * t;
    return from + (to - from) * 0.5 * (1.0 - std::cos(M_PI * t));
  };
  if (step < warm) return blend(lr0, cfg.max_lr, double(step) / double(warm));
  return blend(cfg.max_lr, lr_final, double(step - warm) / double(last - warm));
}

namespace {

/// Normalized target column for the requested field.
Tensor target_column(const MeshCase& c, FieldId field, const FieldNormalizer& norm) {
  if (!c.targets) throw data_error("train: case " + c.case_id + " has no targets");
  Tensor t(c.points.size(), 1);
  const int col = static_cast<int>(field);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    t.data[i] = norm.transform((*c.targets)[i][col]);
  }
  return t;
}

}  // namespace

TrainResult train_field(const std::vector<MeshCase>& cases, const ArchConfig& arch,
                        const FeatureConfig& features, const TrainConfig& cfg) {
  if (cases.empty()) throw data_error("train: empty dataset");
  if (cfg.epochs < 1 || cfg.subsample_n < 1 || !(cfg.max_lr > 0.0)) {
    throw data_error("train: invalid config (epochs >= 1, subsample_n >= 1, max_lr > 0)");
  }
  if (cfg.log_pressure && cfg.field != FieldId::Pressure) {
    throw data_error("train: log transform applies to the pressure field only");
  }

  // Normalizer fitted over every training point of the field.
  std::vector<double> raw;
  for (const MeshCase& c : cases) {
    if (!c.targets) throw data_error("train: case " + c.case_id + " has no targets");
    for (const TargetRow& row : *c.targets) raw.push_back(row[static_cast<int>(cfg.field)]);
  }
  const FieldNormalizer norm = fit_normalizer(raw, cfg.log_pressure);

  TrainResult result;
  result.model = init_model(arch, features, cfg.field, norm, cfg.seed);
  ModelParams& mp = result.model;
  AdamState adam = make_adam_state(mp);

  const std::size_t n_cases = cases.size();
  const std::size_t total_steps = cfg.epochs * n_cases;
  std::vector<std::size_t> order(n_cases);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(cfg.seed, hash_label("shuffle"), epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    double last_lr = 0.0;
    for (std::size_t pos = 0; pos < n_cases; ++pos) {
      const std::size_t ci = order[pos];
      const std::size_t step = (epoch - 1) * n_cases + pos;
      const double lr = onecycle_lr(step, total_steps, cfg);
      last_lr = lr;

      const SubsampleResult sub =
          subsample(cases[ci], cfg.subsample_n, mix_seed(cfg.seed, epoch, ci));
      const CaseTensors ct =
          build_case_tensors(sub.sampled, mp, mix_seed(cfg.seed, hash_label("graphs"), ci));
      const Tensor targets = target_column(sub.sampled, cfg.field, norm);

      Tape tape;
      std::vector<Tape::Id> pids;
      const Tape::Id out = model_forward(tape, mp, ct, true, &pids);
      const Tape::Id loss = tape.mse_loss(out, tape.input(targets));
      const double loss_value = tape.value(loss).data[0];
      if (!std::isfinite(loss_value)) {
        result.diverged = true;
        result.diagnostic = "train: non-finite loss at epoch " + std::to_string(epoch) +
                            " on case " + cases[ci].case_id;
        return result;
      }
      loss_sum += loss_value;

      tape.backward(loss);
      std::vector<const Tensor*> grads;
      grads.reserve(pids.size());
      for (Tape::Id id : pids) grads.push_back(&tape.grad(id));
      try {
        adam_step(mp, grads, adam, lr, cfg);
      } catch (const numerical_error& e) {
        result.diverged = true;
        result.diagnostic = e.what();
        return result;
      }
    }
    result.history.push_back({epoch, loss_sum / double(n_cases), last_lr});
  }
  return result;
}

void save_history(const std::string& path, const std::vector<EpochRecord>& history) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw data_error("history: cannot write " + path);
  for (const EpochRecord& r : history) {
    std::fprintf(f.get(), "%zu %.17g %.17g\n", r.epoch, r.mse, r.lr);
  }
}

}  // namespace geompnn
