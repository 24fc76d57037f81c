#include "dcc/coattention.hpp"

#include "dcc/errors.hpp"

namespace dcc {

namespace {
void check_pair(Tape& tape, const FeatureVar& q_a, const FeatureVar& q_b,
                Var w_l) {
  if (q_a.channels != q_b.channels || q_a.side != q_b.side)
    throw ShapeError("co-attention: feature maps differ, " +
                     std::to_string(q_a.channels) + "x" +
                     std::to_string(q_a.side) + "^2 vs " +
                     std::to_string(q_b.channels) + "x" +
                     std::to_string(q_b.side) + "^2");
  const Tensor& w = tape.value(w_l);
  if (w.rank() != 2 || w.rows() != q_a.channels || w.cols() != q_a.channels)
    throw ShapeError("co-attention: W_L must be " +
                     std::to_string(q_a.channels) + "x" +
                     std::to_string(q_a.channels) + ", got " +
                     Tensor::shape_str(w.shape));
}
}  // namespace

Var affinity(Tape& tape, const FeatureVar& q_a, const FeatureVar& q_b,
             Var w_l) {
  check_pair(tape, q_a, q_b, w_l);
  Var qbt = transpose(tape, q_b.var);                    // M^2 x C
  return matmul(tape, matmul(tape, qbt, w_l), q_a.var);  // M^2 x M^2
}

CoAttentionVars co_attend(Tape& tape, const FeatureVar& q_a,
                          const FeatureVar& q_b, Var w_l) {
  CoAttentionVars out;
  out.L = affinity(tape, q_a, q_b, w_l);
  out.A_a = softmax_rows(tape, out.L);
  out.A_b = softmax_rows(tape, transpose(tape, out.L));
  out.Z_a = matmul(tape, q_b.var, transpose(tape, out.A_a));
  out.Z_b = matmul(tape, q_a.var, transpose(tape, out.A_b));
  return out;
}

}  // namespace dcc
