#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geompnn/net.hpp"

namespace geompnn {

enum class RampShape { Cosine, Linear };

/// Optimization hyperparameters. Defaults: peak learning rate 1e-3 for 600
/// epochs at batch size 1, resampling 32000 volume points per case per epoch
/// (smaller meshes are used whole; the surface is never subsampled).
struct TrainConfig {
  double max_lr = 1e-3;
  std::size_t epochs = 600;
  std::size_t batch_size = 1;
  std::size_t subsample_n = 32000;
  std::uint64_t seed = 0;
  FieldId field = FieldId::VelX;
  bool log_pressure = false;  // Pressure only: compress targets before normalizing

  // Adam moments
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  // 1cycle shape: ramp max_lr/div -> max_lr over the warmup fraction of
  // steps, then anneal to max_lr/final_div; the peak is exactly max_lr.
  double warmup_frac = 0.3;
  double div = 25.0;
  double final_div = 1e4;
  RampShape ramp = RampShape::Cosine;
};

/// First/second moment accumulators, aligned with ModelParams::blocks.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t t = 0;  // completed steps
};

AdamState make_adam_state(const ModelParams& mp);

/// Standard bias-corrected update; epsilon sits outside the square root.
/// Throws numerical_error naming the parameter block on a non-finite
/// gradient.
void adam_step(ModelParams& mp, const std::vector<const Tensor*>& grads, AdamState& st, double lr,
               const TrainConfig& cfg);

/// Learning rate for 0 <= step < total_steps. Boundary values are exact:
/// step 0 -> max_lr/div, warmup boundary -> max_lr, last step ->
/// max_lr/final_div.
double onecycle_lr(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mse = 0.0;       // mean over the epoch's per-case losses
  double lr = 0.0;        // rate applied at the epoch's final step
};

struct TrainResult {
  ModelParams model;
  std::vector<EpochRecord> history;
  bool diverged = false;
  std::string diagnostic;  // set when diverged
};

/// Trains one per-field model: per epoch, visit cases in shuffled order,
/// subsample each mesh (all surface points kept), rebuild the
/// surface-to-volume graph on the subsample, and take one Adam step on the
/// mean squared error of normalized targets at the sampled points. Fully
/// reproducible from cfg.seed. On divergence the partial history is
/// returned with `diverged` set.
TrainResult train_field(const std::vector<MeshCase>& cases, const ArchConfig& arch,
                        const FeatureConfig& features, const TrainConfig& cfg);

/// One `epoch mse lr` line per epoch.
void save_history(const std::string& path, const std::vector<EpochRecord>& history);

}  // namespace geompnn
