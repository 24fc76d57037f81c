#pragma once

#include <cstdint>
#include <string>

#include "dcc/model.hpp"
#include "dcc/training.hpp"

namespace dcc {

// Every tunable surfaced by the modules, merged from an INI-style file
// ([section] then key = value) and flag overrides. Unknown keys are rejected
// before any compute.
struct RunConfig {
  // model
  std::string fusion = "dcc";
  int classes = 10;
  int input_side = 56;
  // glimpse
  int glimpse_k = 2;
  std::string glimpse_kernel = "cauchy";
  bool eq7_division = false;
  // comparator
  int hidden = 64;
  int glimpses = 8;
  double dropout = 0.3;
  // train
  int batch = 8;
  double base_lr = 0.001;
  double decay = 0.88;
  double clip = 100.0;
  std::string clip_mode = "sum";  // sum | global
  int epochs = 50;
  int steps_per_epoch = 0;
  double early_stop_acc = 0.95;
  int checkpoint_every = 0;
  std::uint64_t seed = 0;
  // eval
  int trials = 10;
  // data
  int ids = 20;
  int views = 4;

  // throws ConfigError on unknown key or bad value
  void apply(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void validate() const;

  ModelConfig model_config() const;
  TrainConfig train_config() const;
};

// DCC_SEED env var when set, else 0.
std::uint64_t default_seed();

}  // namespace dcc
