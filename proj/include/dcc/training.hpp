#pragma once

#include <functional>
#include <map>
#include <string>

#include "dcc/datasynth.hpp"
#include "dcc/model.hpp"

namespace dcc {

struct TrainConfig {
  int batch = 8;           // episodes per step
  double base_lr = 0.001;
  double decay = 0.88;
  double clip_threshold = 100.0;
  bool clip_global_norm = false;  // alternate reading: L2 of the concatenation
  int epochs = 50;
  int steps_per_epoch = 0;  // 0: derived from dataset size / batch
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  double early_stop_acc = 0.0;  // 0 disables; else stop once the running
                                // episode accuracy exceeds it
  int checkpoint_every = 0;     // steps; 0: only final
};

// l = base * decay^(m/N), real-valued exponent.
double lr_at(long steps_processed, long steps_per_epoch,
             const TrainConfig& cfg);

// Sum of per-tensor L2 norms (or the global concatenated L2 when
// global_norm); if it exceeds threshold every gradient is scaled by
// threshold/S. Throws TrainError naming the parameter on NaN gradients.
double clip_gradients(ParamStore& store, double threshold,
                      bool global_norm = false);

struct AdamState {
  std::map<std::string, Eigen::ArrayXd> m, v;
  long t = 0;
};

void adam_step(ParamStore& store, AdamState& state, double lr,
               const TrainConfig& cfg);

// Checkpoint: "DCCKPT v1" header, config key-values, RNG state, tensor
// manifest, then a little-endian double payload. Round trips bit-exactly.
void save_checkpoint(const std::string& path, const DccModel& model,
                     const AdamState& adam, long step,
                     const std::mt19937_64& rng);

struct Checkpoint {
  ModelConfig config;
  AdamState adam;
  long step = 0;
  std::mt19937_64 rng;
  std::map<std::string, Tensor> tensors;
};

Checkpoint load_checkpoint(const std::string& path);
DccModel model_from_checkpoint(const Checkpoint& ckpt);

struct TrainResult {
  long steps = 0;
  double final_loss = 0;
  double final_acc = 0;  // running accuracy over the last epoch's episodes
  std::string checkpoint_path;
};

// Episodic training per the recipe: sample a batch of episodes, accumulate
// gradients, clip, ADAM at the decayed rate; metrics line "step,loss,acc,lr"
// per step. on_step (optional) observes progress.
TrainResult train(DccModel& model, const Dataset& dataset,
                  const TrainConfig& cfg, const std::string& checkpoint_path,
                  const std::string& metrics_path,
                  const std::function<void(long, double, double)>& on_step = {});

}  // namespace dcc
