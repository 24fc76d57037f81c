#include "dcc/similarity.hpp"

#include "dcc/errors.hpp"

namespace dcc {

void init_head_params(int embed_dim, int classes, ParamStore& store,
                      std::mt19937_64& rng) {
  store.add("head.w", xavier_init({1, embed_dim}, rng));
  store.add("head.b", Tensor::zeros({1}));
  store.add("head.class_w", xavier_init({classes}, rng));
}

Var score(Tape& tape, Var embedding, ParamBinding& params) {
  const Tensor& e = tape.value(embedding);
  Var col = reshape(tape, embedding, {static_cast<int>(e.size()), 1});
  Var affine = add(tape, reshape(tape, matmul(tape, params["head.w"], col), {1}),
                   params["head.b"]);
  return tanh_op(tape, affine);
}

Var class_probs(Tape& tape, const std::vector<Var>& scores,
                ParamBinding& params) {
  int c = static_cast<int>(scores.size());
  if (c < 2) throw ContractError("class_probs: need at least 2 classes");
  Var s = concat(tape, scores);
  Var logits = mul(tape, params["head.class_w"], s);
  return reshape(tape, softmax_rows(tape, reshape(tape, logits, {1, c})), {c});
}

Var cross_entropy(Tape& tape, Var probs, int true_index) {
  const Tensor& p = tape.value(probs);
  if (true_index < 0 || static_cast<std::size_t>(true_index) >= p.size())
    throw ContractError("cross_entropy: true index " +
                        std::to_string(true_index) + " out of range");
  return scale(tape, log_op(tape, select(tape, probs, true_index)), -1.0);
}

}  // namespace dcc
