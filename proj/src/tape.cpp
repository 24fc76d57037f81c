#include "dcc/tape.hpp"

#include <cmath>

namespace dcc {

Var Tape::emit(Tensor value, std::vector<int> parents, BackFn back,
               const char* tag) {
  if (check_finite_ && !value.finite())
    throw ContractError(std::string("non-finite output of op '") + tag + "'");
  Node n;
  n.value = std::move(value);
  n.grad = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n.value.size()));
  n.parents = std::move(parents);
  n.back = std::move(back);
  n.tag = tag;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor t) { return emit(std::move(t), {}, nullptr, "leaf"); }
Var Tape::constant(Tensor t) {
  return emit(std::move(t), {}, nullptr, "const");
}

void Tape::backward(Var loss) {
  if (!loss.valid() || loss.id >= static_cast<int>(nodes_.size()))
    throw ContractError("backward: invalid loss var");
  if (!nodes_[loss.id].value.is_scalar())
    throw ContractError("backward: loss must be scalar, got shape " +
                        Tensor::shape_str(nodes_[loss.id].value.shape));
  for (auto& n : nodes_) n.grad.setZero();
  nodes_[loss.id].grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    auto& n = nodes_[i];
    if (n.back && !(n.grad == 0.0).all()) n.back(*this, i);
  }
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!same_shape(a, b))
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     Tensor::shape_str(a.shape) + " vs " +
                     Tensor::shape_str(b.shape));
}

// Elementwise unary with pointwise derivative computed from input and output.
template <class FwdFn, class DerFn>
Var unary(Tape& t, Var a, FwdFn fwd, DerFn der, const char* tag) {
  const Tensor& x = t.value(a);
  Tensor out(x.shape, fwd(x.v));
  Eigen::ArrayXd dv = der(x.v, out.v);
  return t.emit(std::move(out), {a.id},
                [pid = a.id, dv](Tape& tp, int self) {
                  tp.grad_ref(pid) += tp.grad_ref(self) * dv;
                },
                tag);
}

}  // namespace

// ---- structural ----

Var transpose(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  RowMat m = x.mat().transpose();
  return t.emit(Tensor::from_matrix(m), {a.id},
                [pid = a.id](Tape& tp, int self) {
                  const Tensor& g = tp.val(self);
                  Eigen::Map<const RowMat> gm(tp.grad_ref(self).data(), g.rows(),
                                              g.cols());
                  Eigen::Map<RowMat>(tp.grad_ref(pid).data(), g.cols(), g.rows()) +=
                      gm.transpose();
                },
                "transpose");
}

Var reshape(Tape& t, Var a, std::vector<int> shape) {
  const Tensor& x = t.value(a);
  if (Tensor::count(shape) != x.size())
    throw ShapeError("reshape: " + Tensor::shape_str(x.shape) + " to " +
                     Tensor::shape_str(shape) + " changes element count");
  return t.emit(Tensor(std::move(shape), x.v), {a.id},
                [pid = a.id](Tape& tp, int self) {
                  tp.grad_ref(pid) += tp.grad_ref(self);
                },
                "reshape");
}

Var concat(Tape& t, const std::vector<Var>& xs) {
  if (xs.empty()) throw ContractError("concat: no inputs");
  Eigen::Index total = 0;
  std::vector<int> parents;
  for (Var x : xs) {
    total += t.value(x).v.size();
    parents.push_back(x.id);
  }
  Eigen::ArrayXd out(total);
  Eigen::Index off = 0;
  for (Var x : xs) {
    const auto& v = t.value(x).v;
    out.segment(off, v.size()) = v;
    off += v.size();
  }
  auto ids = parents;
  return t.emit(Tensor({static_cast<int>(total)}, std::move(out)), parents,
                [ids](Tape& tp, int self) {
                  Eigen::Index off2 = 0;
                  for (int pid : ids) {
                    auto& pg = tp.grad_ref(pid);
                    pg += tp.grad_ref(self).segment(off2, pg.size());
                    off2 += pg.size();
                  }
                },
                "concat");
}

Var row_of(Tape& t, Var a, int r) {
  const Tensor& x = t.value(a);
  int c = x.cols();
  if (r < 0 || r >= x.rows())
    throw ShapeError("row_of: row " + std::to_string(r) + " out of " +
                     std::to_string(x.rows()));
  Eigen::ArrayXd out = x.v.segment(static_cast<Eigen::Index>(r) * c, c);
  return t.emit(Tensor({c}, std::move(out)), {a.id},
                [pid = a.id, r, c](Tape& tp, int self) {
                  tp.grad_ref(pid).segment(static_cast<Eigen::Index>(r) * c, c) +=
                      tp.grad_ref(self);
                },
                "row_of");
}

Var select(Tape& t, Var a, int i) {
  const Tensor& x = t.value(a);
  if (i < 0 || static_cast<std::size_t>(i) >= x.size())
    throw ShapeError("select: index " + std::to_string(i) + " out of " +
                     std::to_string(x.size()));
  return t.emit(Tensor::scalar(x.v[i]), {a.id},
                [pid = a.id, i](Tape& tp, int self) {
                  tp.grad_ref(pid)[i] += tp.grad_ref(self)[0];
                },
                "select");
}

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& x = t.value(a);
  const Tensor& y = t.value(b);
  if (x.cols() != y.rows())
    throw ShapeError("matmul: inner extents differ, " +
                     Tensor::shape_str(x.shape) + " x " +
                     Tensor::shape_str(y.shape));
  RowMat m = x.mat() * y.mat();
  return t.emit(Tensor::from_matrix(m), {a.id, b.id},
                [pa = a.id, pb = b.id](Tape& tp, int self) {
                  const Tensor& xa = tp.val(pa);
                  const Tensor& xb = tp.val(pb);
                  const Tensor& o = tp.val(self);
                  Eigen::Map<const RowMat> g(tp.grad_ref(self).data(), o.rows(),
                                             o.cols());
                  Eigen::Map<RowMat>(tp.grad_ref(pa).data(), xa.rows(),
                                     xa.cols()) += g * xb.mat().transpose();
                  Eigen::Map<RowMat>(tp.grad_ref(pb).data(), xb.rows(),
                                     xb.cols()) += xa.mat().transpose() * g;
                },
                "matmul");
}

// ---- elementwise ----

namespace {
template <class Op>
Var binary(Tape& t, Var a, Var b, Op op, const char* tag,
           std::function<void(Tape&, int, int, int)> back) {
  const Tensor& x = t.value(a);
  const Tensor& y = t.value(b);
  require_same_shape(x, y, tag);
  Tensor out(x.shape, op(x.v, y.v));
  return t.emit(std::move(out), {a.id, b.id},
                [pa = a.id, pb = b.id, back](Tape& tp, int self) {
                  back(tp, self, pa, pb);
                },
                tag);
}
}  // namespace

Var add(Tape& t, Var a, Var b) {
  return binary(
      t, a, b, [](const auto& x, const auto& y) { return (x + y).eval(); },
      "add", [](Tape& tp, int self, int pa, int pb) {
        tp.grad_ref(pa) += tp.grad_ref(self);
        tp.grad_ref(pb) += tp.grad_ref(self);
      });
}

Var sub(Tape& t, Var a, Var b) {
  return binary(
      t, a, b, [](const auto& x, const auto& y) { return (x - y).eval(); },
      "sub", [](Tape& tp, int self, int pa, int pb) {
        tp.grad_ref(pa) += tp.grad_ref(self);
        tp.grad_ref(pb) -= tp.grad_ref(self);
      });
}

Var mul(Tape& t, Var a, Var b) {
  return binary(
      t, a, b, [](const auto& x, const auto& y) { return (x * y).eval(); },
      "mul", [](Tape& tp, int self, int pa, int pb) {
        tp.grad_ref(pa) += tp.grad_ref(self) * tp.val(pb).v;
        tp.grad_ref(pb) += tp.grad_ref(self) * tp.val(pa).v;
      });
}

Var div(Tape& t, Var a, Var b) {
  return binary(
      t, a, b, [](const auto& x, const auto& y) { return (x / y).eval(); },
      "div", [](Tape& tp, int self, int pa, int pb) {
        const auto& y = tp.val(pb).v;
        tp.grad_ref(pa) += tp.grad_ref(self) / y;
        tp.grad_ref(pb) -= tp.grad_ref(self) * tp.val(pa).v / (y * y);
      });
}

Var scale(Tape& t, Var a, double c) {
  return unary(
      t, a, [c](const auto& x) { return (x * c).eval(); },
      [c](const auto& x, const auto&) {
        return Eigen::ArrayXd::Constant(x.size(), c).eval();
      },
      "scale");
}

Var add_const(Tape& t, Var a, double c) {
  return unary(
      t, a, [c](const auto& x) { return (x + c).eval(); },
      [](const auto& x, const auto&) {
        return Eigen::ArrayXd::Ones(x.size()).eval();
      },
      "add_const");
}

Var tanh_op(Tape& t, Var a) {
  return unary(
      t, a, [](const auto& x) { return x.tanh().eval(); },
      [](const auto&, const auto& y) { return (1.0 - y * y).eval(); }, "tanh");
}

Var sigmoid(Tape& t, Var a) {
  return unary(
      t, a,
      [](const auto& x) { return (0.5 * (0.5 * x).tanh() + 0.5).eval(); },
      [](const auto&, const auto& y) { return (y * (1.0 - y)).eval(); },
      "sigmoid");
}

Var exp_op(Tape& t, Var a) {
  return unary(
      t, a, [](const auto& x) { return x.exp().eval(); },
      [](const auto&, const auto& y) { return y.eval(); }, "exp");
}

Var log_op(Tape& t, Var a) {
  return unary(
      t, a, [](const auto& x) { return x.log().eval(); },
      [](const auto& x, const auto&) { return x.inverse().eval(); }, "log");
}

Var abs_op(Tape& t, Var a) {
  return unary(
      t, a, [](const auto& x) { return x.abs().eval(); },
      [](const auto& x, const auto&) { return x.sign().eval(); }, "abs");
}

Var reciprocal(Tape& t, Var a) {
  return unary(
      t, a, [](const auto& x) { return x.inverse().eval(); },
      [](const auto&, const auto& y) { return (-y * y).eval(); }, "reciprocal");
}

Var clamp_min(Tape& t, Var a, double lo) {
  return unary(
      t, a, [lo](const auto& x) { return x.max(lo).eval(); },
      [lo](const auto& x, const auto&) {
        return (x > lo).template cast<double>().eval();
      },
      "clamp_min");
}

// ---- scalar-variable broadcast ----

namespace {
double scalar_of(const Tape& t, Var s, const char* op) {
  const Tensor& x = t.value(s);
  if (!x.is_scalar())
    throw ShapeError(std::string(op) + ": expected scalar, got " +
                     Tensor::shape_str(x.shape));
  return x.v[0];
}
}  // namespace

Var mul_scalar(Tape& t, Var a, Var s) {
  const Tensor& x = t.value(a);
  double c = scalar_of(t, s, "mul_scalar");
  return t.emit(Tensor(x.shape, (x.v * c).eval()), {a.id, s.id},
                [pa = a.id, ps = s.id](Tape& tp, int self) {
                  double cc = tp.val(ps).v[0];
                  tp.grad_ref(pa) += tp.grad_ref(self) * cc;
                  tp.grad_ref(ps)[0] +=
                      (tp.grad_ref(self) * tp.val(pa).v).sum();
                },
                "mul_scalar");
}

Var div_scalar(Tape& t, Var a, Var s) {
  const Tensor& x = t.value(a);
  double c = scalar_of(t, s, "div_scalar");
  return t.emit(Tensor(x.shape, (x.v / c).eval()), {a.id, s.id},
                [pa = a.id, ps = s.id](Tape& tp, int self) {
                  double cc = tp.val(ps).v[0];
                  tp.grad_ref(pa) += tp.grad_ref(self) / cc;
                  tp.grad_ref(ps)[0] -=
                      (tp.grad_ref(self) * tp.val(pa).v).sum() / (cc * cc);
                },
                "div_scalar");
}

Var scalar_axpy(Tape& t, const Tensor& coeffs, Var a, Var b) {
  double av = scalar_of(t, a, "scalar_axpy");
  double bv = scalar_of(t, b, "scalar_axpy");
  Tensor out(coeffs.shape, (av + coeffs.v * bv).eval());
  Eigen::ArrayXd cs = coeffs.v;
  return t.emit(std::move(out), {a.id, b.id},
                [pa = a.id, pb = b.id, cs](Tape& tp, int self) {
                  tp.grad_ref(pa)[0] += tp.grad_ref(self).sum();
                  tp.grad_ref(pb)[0] += (tp.grad_ref(self) * cs).sum();
                },
                "scalar_axpy");
}

Var sub_outer(Tape& t, const Tensor& row, Var col) {
  const Tensor& c = t.value(col);
  int k = static_cast<int>(c.size());
  int a_len = static_cast<int>(row.size());
  Eigen::ArrayXd out(static_cast<Eigen::Index>(k) * a_len);
  for (int i = 0; i < k; ++i)
    out.segment(static_cast<Eigen::Index>(i) * a_len, a_len) = row.v - c.v[i];
  return t.emit(Tensor({k, a_len}, std::move(out)), {col.id},
                [pid = col.id, k, a_len](Tape& tp, int self) {
                  auto& g = tp.grad_ref(self);
                  for (int i = 0; i < k; ++i)
                    tp.grad_ref(pid)[i] -=
                        g.segment(static_cast<Eigen::Index>(i) * a_len, a_len)
                            .sum();
                },
                "sub_outer");
}

// ---- reductions / normalizations ----

Var row_sum(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  Eigen::ArrayXd out = x.mat().rowwise().sum().array();
  int r = x.rows(), c = x.cols();
  return t.emit(Tensor({r}, std::move(out)), {a.id},
                [pid = a.id, r, c](Tape& tp, int self) {
                  Eigen::Map<RowMat> pg(tp.grad_ref(pid).data(), r, c);
                  pg.colwise() +=
                      Eigen::Map<const Eigen::VectorXd>(
                          tp.grad_ref(self).data(), r);
                },
                "row_sum");
}

Var col_sum(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  Eigen::ArrayXd out = x.mat().colwise().sum().transpose().array();
  int r = x.rows(), c = x.cols();
  return t.emit(Tensor({c}, std::move(out)), {a.id},
                [pid = a.id, r, c](Tape& tp, int self) {
                  Eigen::Map<RowMat> pg(tp.grad_ref(pid).data(), r, c);
                  pg.rowwise() += Eigen::Map<const Eigen::VectorXd>(
                                      tp.grad_ref(self).data(), c)
                                      .transpose();
                },
                "col_sum");
}

Var sum_all(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  return t.emit(Tensor::scalar(x.v.sum()), {a.id},
                [pid = a.id](Tape& tp, int self) {
                  tp.grad_ref(pid) += tp.grad_ref(self)[0];
                },
                "sum_all");
}

Var softmax_rows(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  int r = x.rows(), c = x.cols();
  Eigen::ArrayXd out(x.v.size());
  for (int i = 0; i < r; ++i) {
    auto row = x.v.segment(static_cast<Eigen::Index>(i) * c, c);
    Eigen::ArrayXd e = (row - row.maxCoeff()).exp();
    out.segment(static_cast<Eigen::Index>(i) * c, c) = e / e.sum();
  }
  return t.emit(Tensor({r, c}, std::move(out)), {a.id},
                [pid = a.id, r, c](Tape& tp, int self) {
                  const auto& y = tp.val(self).v;
                  const auto& g = tp.grad_ref(self);
                  for (int i = 0; i < r; ++i) {
                    auto yi = y.segment(static_cast<Eigen::Index>(i) * c, c);
                    auto gi = g.segment(static_cast<Eigen::Index>(i) * c, c);
                    double dot = (yi * gi).sum();
                    tp.grad_ref(pid).segment(static_cast<Eigen::Index>(i) * c,
                                             c) += yi * (gi - dot);
                  }
                },
                "softmax_rows");
}

Var normalize_rows(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  int r = x.rows(), c = x.cols();
  Eigen::ArrayXd out(x.v.size());
  std::vector<char> uniform(r, 0);
  for (int i = 0; i < r; ++i) {
    auto row = x.v.segment(static_cast<Eigen::Index>(i) * c, c);
    double s = row.sum();
    if (s == 0.0) {
      out.segment(static_cast<Eigen::Index>(i) * c, c) = 1.0 / c;
      uniform[i] = 1;  // constant fallback, no gradient
    } else {
      out.segment(static_cast<Eigen::Index>(i) * c, c) = row / s;
    }
  }
  return t.emit(Tensor({r, c}, std::move(out)), {a.id},
                [pid = a.id, r, c, uniform](Tape& tp, int self) {
                  const auto& xv = tp.val(pid).v;
                  const auto& g = tp.grad_ref(self);
                  for (int i = 0; i < r; ++i) {
                    if (uniform[i]) continue;
                    auto xi = xv.segment(static_cast<Eigen::Index>(i) * c, c);
                    auto gi = g.segment(static_cast<Eigen::Index>(i) * c, c);
                    double s = xi.sum();
                    double dot = (gi * xi).sum();
                    tp.grad_ref(pid).segment(static_cast<Eigen::Index>(i) * c,
                                             c) += gi / s - dot / (s * s);
                  }
                },
                "normalize_rows");
}

// ---- convolutional plumbing ----

namespace {
struct ConvGeom {
  int ch, h, w, k, stride, pad, ho, wo;
};

ConvGeom conv_geom(const Tensor& x, int k, int stride, int pad) {
  if (x.rank() != 3)
    throw ShapeError("unfold: expected rank-3 C x H x W, got " +
                     Tensor::shape_str(x.shape));
  ConvGeom g{x.shape[0], x.shape[1], x.shape[2], k, stride, pad, 0, 0};
  g.ho = (g.h + 2 * pad - k) / stride + 1;
  g.wo = (g.w + 2 * pad - k) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0)
    throw ShapeError("unfold: kernel does not fit input " +
                     Tensor::shape_str(x.shape));
  return g;
}
}  // namespace

Var unfold(Tape& t, Var a, int k, int stride, int pad) {
  const Tensor& x = t.value(a);
  ConvGeom g = conv_geom(x, k, stride, pad);
  int rows = g.ch * k * k, cols = g.ho * g.wo;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(rows) * cols);
  auto src_idx = [&](int c, int y, int xx) {
    return (static_cast<Eigen::Index>(c) * g.h + y) * g.w + xx;
  };
  for (int c = 0; c < g.ch; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        int row = (c * k + ky) * k + kx;
        for (int oy = 0; oy < g.ho; ++oy)
          for (int ox = 0; ox < g.wo; ++ox) {
            int sy = oy * stride + ky - pad;
            int sx = ox * stride + kx - pad;
            if (sy < 0 || sy >= g.h || sx < 0 || sx >= g.w) continue;
            out[static_cast<Eigen::Index>(row) * cols + oy * g.wo + ox] =
                x.v[src_idx(c, sy, sx)];
          }
      }
  return t.emit(Tensor({rows, cols}, std::move(out)), {a.id},
                [pid = a.id, g, rows, cols](Tape& tp, int self) {
                  auto& pg = tp.grad_ref(pid);
                  const auto& sg = tp.grad_ref(self);
                  for (int c = 0; c < g.ch; ++c)
                    for (int ky = 0; ky < g.k; ++ky)
                      for (int kx = 0; kx < g.k; ++kx) {
                        int row = (c * g.k + ky) * g.k + kx;
                        for (int oy = 0; oy < g.ho; ++oy)
                          for (int ox = 0; ox < g.wo; ++ox) {
                            int sy = oy * g.stride + ky - g.pad;
                            int sx = ox * g.stride + kx - g.pad;
                            if (sy < 0 || sy >= g.h || sx < 0 || sx >= g.w)
                              continue;
                            pg[(static_cast<Eigen::Index>(c) * g.h + sy) * g.w +
                               sx] += sg[static_cast<Eigen::Index>(row) * cols +
                                         oy * g.wo + ox];
                          }
                      }
                },
                "unfold");
}

Var avgpool2(Tape& t, Var a) {
  const Tensor& x = t.value(a);
  if (x.rank() != 3 || x.shape[1] % 2 || x.shape[2] % 2)
    throw ShapeError("avgpool2: expected C x H x W with even H, W, got " +
                     Tensor::shape_str(x.shape));
  int ch = x.shape[0], h = x.shape[1], w = x.shape[2];
  int ho = h / 2, wo = w / 2;
  Eigen::ArrayXd out(static_cast<Eigen::Index>(ch) * ho * wo);
  for (int c = 0; c < ch; ++c)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        auto at = [&](int dy, int dx) {
          return x.v[(static_cast<Eigen::Index>(c) * h + 2 * oy + dy) * w +
                     2 * ox + dx];
        };
        out[(static_cast<Eigen::Index>(c) * ho + oy) * wo + ox] =
            0.25 * (at(0, 0) + at(0, 1) + at(1, 0) + at(1, 1));
      }
  return t.emit(Tensor({ch, ho, wo}, std::move(out)), {a.id},
                [pid = a.id, ch, h, w, ho, wo](Tape& tp, int self) {
                  auto& pg = tp.grad_ref(pid);
                  const auto& sg = tp.grad_ref(self);
                  for (int c = 0; c < ch; ++c)
                    for (int oy = 0; oy < ho; ++oy)
                      for (int ox = 0; ox < wo; ++ox) {
                        double g =
                            0.25 *
                            sg[(static_cast<Eigen::Index>(c) * ho + oy) * wo + ox];
                        for (int dy = 0; dy < 2; ++dy)
                          for (int dx = 0; dx < 2; ++dx)
                            pg[(static_cast<Eigen::Index>(c) * h + 2 * oy + dy) *
                                   w +
                               2 * ox + dx] += g;
                      }
                },
                "avgpool2");
}

Var spp_max(Tape& t, Var a, int m) {
  const Tensor& x = t.value(a);
  if (x.rank() != 2 || x.cols() != m * m)
    throw ShapeError("spp_max: expected C x M^2 with M=" + std::to_string(m) +
                     ", got " + Tensor::shape_str(x.shape));
  int ch = x.rows();
  int half = (m + 1) / 2;  // ceil partition for odd M
  Eigen::ArrayXd out(static_cast<Eigen::Index>(ch) * 5);
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(ch) * 5);
  auto cell = [&](int c, int y, int xx) {
    return static_cast<Eigen::Index>(c) * m * m + y * m + xx;
  };
  for (int c = 0; c < ch; ++c) {
    // bins 0..3: quadrants (row-major over the 2x2 subdivision); bin 4: global
    for (int b = 0; b < 5; ++b) {
      int y0 = 0, y1 = m, x0 = 0, x1 = m;
      if (b < 4) {
        y0 = (b / 2) ? half : 0;
        y1 = (b / 2) ? m : half;
        x0 = (b % 2) ? half : 0;
        x1 = (b % 2) ? m : half;
      }
      double best = -std::numeric_limits<double>::infinity();
      Eigen::Index bi = 0;
      for (int y = y0; y < y1; ++y)
        for (int xx = x0; xx < x1; ++xx) {
          double v = x.v[cell(c, y, xx)];
          if (v > best) {
            best = v;
            bi = cell(c, y, xx);
          }
        }
      out[static_cast<Eigen::Index>(c) * 5 + b] = best;
      argmax[static_cast<std::size_t>(c) * 5 + b] = bi;
    }
  }
  return t.emit(Tensor({ch * 5}, std::move(out)), {a.id},
                [pid = a.id, argmax](Tape& tp, int self) {
                  const auto& sg = tp.grad_ref(self);
                  for (std::size_t i = 0; i < argmax.size(); ++i)
                    tp.grad_ref(pid)[argmax[i]] +=
                        sg[static_cast<Eigen::Index>(i)];
                },
                "spp_max");
}

}  // namespace dcc
