#pragma once

#include <functional>
#include <vector>

#include "dcc/tensor.hpp"

namespace dcc {

// Handle into a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Append-only record of a forward computation. Nodes are created in
// topological order; backward() walks them once in reverse. Single-writer:
// build and traverse one Tape from one thread, distinct Tapes are independent.
class Tape {
 public:
  // Differentiable input; its gradient is available after backward().
  Var leaf(Tensor t);
  // Non-differentiable embedded constant.
  Var constant(Tensor t);

  const Tensor& value(Var x) const { return nodes_[x.id].value; }
  const Eigen::ArrayXd& grad(Var x) const { return nodes_[x.id].grad; }

  // Accumulates d(loss)/d(node) for every node. loss must be scalar.
  void backward(Var loss);

  // When on, every op output is checked for NaN/Inf and throws ContractError.
  void set_check_finite(bool on) { check_finite_ = on; }

  std::size_t node_count() const { return nodes_.size(); }

  // --- internal, used by the op free functions ---
  using BackFn = std::function<void(Tape&, int self)>;
  Var emit(Tensor value, std::vector<int> parents, BackFn back, const char* tag);
  Eigen::ArrayXd& grad_ref(int id) { return nodes_[id].grad; }
  const Tensor& val(int id) const { return nodes_[id].value; }

 private:
  struct Node {
    Tensor value;
    Eigen::ArrayXd grad;
    std::vector<int> parents;
    BackFn back;
    const char* tag;
  };
  std::vector<Node> nodes_;
  bool check_finite_ = false;
};

// ---- structural ----
Var transpose(Tape& t, Var a);              // 2-D
Var reshape(Tape& t, Var a, std::vector<int> shape);
Var concat(Tape& t, const std::vector<Var>& xs);  // flatten-and-join to vector
Var row_of(Tape& t, Var a, int r);          // r-th row of a 2-D tensor
Var select(Tape& t, Var a, int i);          // i-th element, scalar out
Var matmul(Tape& t, Var a, Var b);

// ---- elementwise ----
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var div(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
Var add_const(Tape& t, Var a, double c);
Var tanh_op(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var exp_op(Tape& t, Var a);
Var log_op(Tape& t, Var a);
Var abs_op(Tape& t, Var a);                 // subgradient 0 at 0
Var reciprocal(Tape& t, Var a);
Var clamp_min(Tape& t, Var a, double lo);   // zero gradient where clamped

// ---- scalar-variable broadcast ----
Var mul_scalar(Tape& t, Var a, Var s);      // tensor * scalar var
Var div_scalar(Tape& t, Var a, Var s);
// out_i = a + coeffs_i * b for scalar vars a, b.
Var scalar_axpy(Tape& t, const Tensor& coeffs, Var a, Var b);
// D[i][j] = row_j - col_i for a constant row (length A) and a column var
// (length K); output K x A.
Var sub_outer(Tape& t, const Tensor& row, Var col);

// ---- reductions / normalizations ----
Var row_sum(Tape& t, Var a);                // r x c -> r
Var col_sum(Tape& t, Var a);                // r x c -> c
Var sum_all(Tape& t, Var a);                // scalar
Var softmax_rows(Tape& t, Var a);           // max-shifted, rows sum to 1
Var normalize_rows(Tape& t, Var a);         // divide each row by its sum;
                                            // all-zero row falls back to uniform

// ---- convolutional plumbing ----
// Patch-unfold of a C x H x W tensor with zero padding: output
// (C*k*k) x (Ho*Wo) where Ho = (H + 2*pad - k)/stride + 1.
Var unfold(Tape& t, Var a, int k, int stride, int pad);
// 2x2 average pooling per channel of a C x H x W tensor (H, W even).
Var avgpool2(Tape& t, Var a);
// Per-channel max over the four quadrants plus the global max of a C x M^2
// tensor whose rows are M x M maps; output vector of length 5*C.
Var spp_max(Tape& t, Var a, int m);

}  // namespace dcc
