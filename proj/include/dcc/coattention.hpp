#pragma once

#include "dcc/encoder.hpp"
#include "dcc/tape.hpp"

namespace dcc {

// Affinity and mutual attention summaries of a feature-map pair.
// L is M^2 x M^2, A_a / A_b are row-stochastic, Z_a / Z_b are C x M^2.
struct CoAttentionVars {
  Var L, A_a, A_b, Z_a, Z_b;
};

// L = Q_b^T W Q_a with Q in C x M^2 and W in C x C.
Var affinity(Tape& tape, const FeatureVar& q_a, const FeatureVar& q_b, Var w_l);

// A_a = softmax_rows(L), A_b = softmax_rows(L^T); summaries mix the other
// image's feature columns with the row weights, so every summary column is a
// convex combination: Z_a = Q_b A_a^T, Z_b = Q_a A_b^T.
CoAttentionVars co_attend(Tape& tape, const FeatureVar& q_a,
                          const FeatureVar& q_b, Var w_l);

}  // namespace dcc
