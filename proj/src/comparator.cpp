#include "dcc/comparator.hpp"

#include "dcc/errors.hpp"

namespace dcc {

namespace {
const char* kGates = "ifgo";
}

void init_comparator_params(const ComparatorConfig& cfg, int channels,
                            ParamStore& store, std::mt19937_64& rng) {
  int h = cfg.hidden;
  int x = channels * cfg.glimpse.K * cfg.glimpse.K;
  store.add("cmp.wg", xavier_init({3, h}, rng));
  store.add("cmp.bg", Tensor::zeros({3}));
  for (int g = 0; g < 4; ++g) {
    std::string base = std::string("cmp.lstm.") + kGates[g];
    store.add(base + ".w", xavier_init({h, x}, rng));
    store.add(base + ".u", xavier_init({h, h}, rng));
    store.add(base + ".b", Tensor::zeros({h}));
  }
}

ComparatorState initial_state(Tape& tape, int hidden) {
  ComparatorState s;
  s.h = tape.constant(Tensor::zeros({hidden}));
  s.c = tape.constant(Tensor::zeros({hidden}));
  return s;
}

Var select_stream(int t, Var z_a, Var z_b) {
  if (t < 0) throw ContractError("select_stream: negative step");
  return t % 2 == 0 ? z_a : z_b;
}

namespace {
Var affine(Tape& tape, Var w, Var x_vec, Var b) {
  int rows = tape.value(w).rows();
  Var col = reshape(tape, x_vec, {static_cast<int>(tape.value(x_vec).size()), 1});
  return add(tape, reshape(tape, matmul(tape, w, col), {rows}), b);
}
}  // namespace

ComparatorState step(Tape& tape, const ComparatorState& state, Var z_a,
                     Var z_b, const ComparatorConfig& cfg, int channels, int m,
                     ParamBinding& params) {
  int total = 2 * cfg.glimpses;
  if (state.t >= total)
    throw ContractError("comparator step past T=" + std::to_string(total));

  Var raw = affine(tape, params["cmp.wg"], state.h, params["cmp.bg"]);
  GlimpseVars gp = unpack_glimpse(tape, raw, m, m, cfg.glimpse.K);
  FilterbankVars fb = filterbanks(tape, gp, cfg.glimpse);
  Var z_t = select_stream(state.t, z_a, z_b);
  Var glimpse = extract_glimpse(tape, gp, fb, z_t, channels, m);

  auto gate = [&](char g) {
    std::string base = std::string("cmp.lstm.") + g;
    Var wx = affine(tape, params[base + ".w"], glimpse, params[base + ".b"]);
    Var uh = reshape(tape,
                     matmul(tape, params[base + ".u"],
                            reshape(tape, state.h, {cfg.hidden, 1})),
                     {cfg.hidden});
    return add(tape, wx, uh);
  };
  Var i = sigmoid(tape, gate('i'));
  Var f = sigmoid(tape, gate('f'));
  Var g = tanh_op(tape, gate('g'));
  Var o = sigmoid(tape, gate('o'));

  ComparatorState next;
  next.c = add(tape, mul(tape, f, state.c), mul(tape, i, g));
  next.h = mul(tape, o, tanh_op(tape, next.c));
  next.t = state.t + 1;
  next.trajectory = state.trajectory;
  next.trajectory.push_back(read_params(tape, gp));
  return next;
}

CompareResult compare(Tape& tape, Var z_a, Var z_b, const ComparatorConfig& cfg,
                      int channels, int m, ParamBinding& params,
                      const std::optional<Tensor>& dropout_mask) {
  if (cfg.glimpses < 1) throw ContractError("compare: glimpses must be >= 1");
  ComparatorState state = initial_state(tape, cfg.hidden);
  for (int t = 0; t < 2 * cfg.glimpses; ++t)
    state = step(tape, state, z_a, z_b, cfg, channels, m, params);
  Var h = state.h;
  if (dropout_mask) {
    if (static_cast<int>(dropout_mask->size()) != cfg.hidden)
      throw ShapeError("compare: dropout mask length " +
                       std::to_string(dropout_mask->size()) + " != hidden " +
                       std::to_string(cfg.hidden));
    Tensor scaled = *dropout_mask;
    scaled.v /= (1.0 - cfg.dropout);  // inverted dropout
    h = mul(tape, h, tape.constant(std::move(scaled)));
  }
  return {h, std::move(state.trajectory)};
}

}  // namespace dcc
