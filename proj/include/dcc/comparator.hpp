#pragma once

#include <optional>
#include <vector>

#include "dcc/glimpse.hpp"
#include "dcc/params.hpp"
#include "dcc/tape.hpp"

namespace dcc {

struct ComparatorConfig {
  int hidden = 64;
  int glimpses = 8;  // G; total steps T = 2G
  double dropout = 0.3;
  GlimpseConfig glimpse;
};

// Registers comparator parameters: glimpse projection cmp.wg (3 x H) and
// cmp.bg (3, zero-initialized so the first window covers the whole grid), and
// LSTM weights cmp.lstm.{i,f,g,o}.{w,u,b} for input size C*K^2.
void init_comparator_params(const ComparatorConfig& cfg, int channels,
                            ParamStore& store, std::mt19937_64& rng);

struct ComparatorState {
  int t = 0;
  Var h, c;
  std::vector<GlimpseParams> trajectory;
};

ComparatorState initial_state(Tape& tape, int hidden);

// Z_a when t is even, Z_b otherwise.
Var select_stream(int t, Var z_a, Var z_b);

// One recurrent update: project h into glimpse params, read the attended
// patch from the current stream, feed it through the LSTM gates.
ComparatorState step(Tape& tape, const ComparatorState& state, Var z_a,
                     Var z_b, const ComparatorConfig& cfg, int channels, int m,
                     ParamBinding& params);

struct CompareResult {
  Var h_final;
  std::vector<GlimpseParams> trajectory;
};

// Runs exactly 2G steps. dropout_mask (0/1 entries, length H) is applied to
// the final hidden state with inverted-dropout scaling; absent means
// inference mode.
CompareResult compare(Tape& tape, Var z_a, Var z_b, const ComparatorConfig& cfg,
                      int channels, int m, ParamBinding& params,
                      const std::optional<Tensor>& dropout_mask = {});

}  // namespace dcc
