#pragma once

#include <vector>

#include "dcc/params.hpp"
#include "dcc/tape.hpp"

namespace dcc {

// One training unit: an unknown image scored against one reference per class.
// Images are 3 x S x S tensors in [0,1].
struct Episode {
  Tensor unknown;
  std::vector<Tensor> references;
  int true_index = 0;  // 0-based position in references
};

// Registers head.w (1 x embed_dim), head.b (1), head.class_w (classes).
void init_head_params(int embed_dim, int classes, ParamStore& store,
                      std::mt19937_64& rng);

// s = tanh(w . e + b), in (-1, 1).
Var score(Tape& tape, Var embedding, ParamBinding& params);

// p = softmax over j of class_w[j] * s_j.
Var class_probs(Tape& tape, const std::vector<Var>& scores,
                ParamBinding& params);

// -log p[true_index].
Var cross_entropy(Tape& tape, Var probs, int true_index);

}  // namespace dcc
