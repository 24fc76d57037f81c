#include "dcc/glimpse.hpp"

#include <algorithm>
#include <cmath>

#include "dcc/errors.hpp"

namespace dcc {

GlimpseVars unpack_glimpse(Tape& tape, Var raw, int a, int b, int k) {
  if (a < 1 || b < 1 || k < 1)
    throw ContractError("unpack_glimpse: A, B, K must be >= 1");
  const Tensor& r = tape.value(raw);
  if (r.size() != 3)
    throw ShapeError("unpack_glimpse: raw must have 3 elements, got " +
                     Tensor::shape_str(r.shape));
  GlimpseVars out;
  out.K = k;
  out.A = a;
  out.B = b;
  Var gxh = select(tape, raw, 0);
  Var gyh = select(tape, raw, 1);
  Var dh = abs_op(tape, select(tape, raw, 2));
  out.g_x = scale(tape, add_const(tape, gxh, 1.0), (a - 1) / 2.0);
  out.g_y = scale(tape, add_const(tape, gyh, 1.0), (b - 1) / 2.0);
  double span = static_cast<double>(std::max(a, b));
  double factor = k > 1 ? span / (k - 1) : span;  // K=1 denominator guard
  out.delta = clamp_min(tape, scale(tape, dh, factor), 1e-6);
  out.gamma = exp_op(tape, add_const(tape, scale(tape, dh, -2.0), 1.0));
  return out;
}

namespace {

Tensor center_offsets(int k) {
  Tensor t = Tensor::zeros({k});
  for (int i = 1; i <= k; ++i) t.v[i - 1] = i - k / 2.0 - 0.5;
  return t;
}

Tensor grid_coords(int n) {
  Tensor t = Tensor::zeros({n});
  for (int i = 0; i < n; ++i) t.v[i] = i;
  return t;
}

Var kernel_rows(Tape& tape, Var mu, Var gamma, int extent,
                const GlimpseConfig& cfg) {
  Var d = sub_outer(tape, grid_coords(extent), mu);  // K x extent, a - mu_i
  Var dg = div_scalar(tape, d, gamma);
  Var raw;
  if (cfg.kernel == GlimpseConfig::Cauchy) {
    Var denom =
        mul_scalar(tape, add_const(tape, mul(tape, dg, dg), 1.0), gamma);
    raw = reciprocal(tape, scale(tape, denom, M_PI));
  } else {
    raw = exp_op(tape, scale(tape, mul(tape, dg, dg), -0.5));
  }
  return normalize_rows(tape, raw);
}

}  // namespace

FilterbankVars filterbanks(Tape& tape, const GlimpseVars& p,
                           const GlimpseConfig& cfg) {
  Tensor offs = center_offsets(p.K);
  Var stride =
      cfg.eq7_division ? reciprocal(tape, p.delta) : p.delta;
  Var mu_x = scalar_axpy(tape, offs, p.g_x, stride);
  Var mu_y = scalar_axpy(tape, offs, p.g_y, stride);
  FilterbankVars fb;
  fb.F_X = kernel_rows(tape, mu_x, p.gamma, p.A, cfg);
  fb.F_Y = kernel_rows(tape, mu_y, p.gamma, p.B, cfg);
  return fb;
}

Var extract_glimpse(Tape& tape, const GlimpseVars& p, const FilterbankVars& fb,
                    Var z, int channels, int m) {
  const Tensor& zt = tape.value(z);
  if (zt.rank() != 2 || zt.rows() != channels || zt.cols() != m * m)
    throw ShapeError("extract_glimpse: summary must be " +
                     std::to_string(channels) + "x" + std::to_string(m * m) +
                     ", got " + Tensor::shape_str(zt.shape));
  if (p.A != m || p.B != m)
    throw ShapeError("extract_glimpse: glimpse grid " + std::to_string(p.A) +
                     "x" + std::to_string(p.B) + " does not match M=" +
                     std::to_string(m));
  Var fxt = transpose(tape, fb.F_X);
  std::vector<Var> per_channel;
  per_channel.reserve(channels);
  for (int c = 0; c < channels; ++c) {
    Var zc = reshape(tape, row_of(tape, z, c), {m, m});
    per_channel.push_back(matmul(tape, matmul(tape, fb.F_Y, zc), fxt));
  }
  return mul_scalar(tape, concat(tape, per_channel), p.gamma);
}

RowMat filterbank_matrix(const GlimpseParams& p, int extent,
                         const GlimpseConfig& cfg, bool x_axis) {
  double g = x_axis ? p.g_x : p.g_y;
  double stride = cfg.eq7_division ? 1.0 / p.delta : p.delta;
  RowMat f(p.K, extent);
  for (int i = 1; i <= p.K; ++i) {
    double mu = g + (i - p.K / 2.0 - 0.5) * stride;
    double sum = 0;
    for (int a = 0; a < extent; ++a) {
      double d = (a - mu) / p.gamma;
      double w = cfg.kernel == GlimpseConfig::Cauchy
                     ? 1.0 / (M_PI * p.gamma * (1.0 + d * d))
                     : std::exp(-0.5 * d * d);
      f(i - 1, a) = w;
      sum += w;
    }
    if (sum == 0.0)
      f.row(i - 1).setConstant(1.0 / extent);
    else
      f.row(i - 1) /= sum;
  }
  return f;
}

std::pair<int, int> window_cells(const GlimpseParams& p, int extent,
                                 const GlimpseConfig& cfg, bool x_axis,
                                 double frac) {
  RowMat f = filterbank_matrix(p, extent, cfg, x_axis);
  double threshold = frac / extent;
  int lo = extent, hi = -1;
  for (int a = 0; a < extent; ++a) {
    if (f.col(a).maxCoeff() >= threshold) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  if (hi < 0) {  // everything below threshold: fall back to the center cell
    int c = std::clamp(
        static_cast<int>(std::lround(x_axis ? p.g_x : p.g_y)), 0, extent - 1);
    return {c, c};
  }
  return {lo, hi};
}

GlimpseParams read_params(const Tape& tape, const GlimpseVars& p) {
  GlimpseParams out;
  out.g_x = tape.value(p.g_x).v[0];
  out.g_y = tape.value(p.g_y).v[0];
  out.delta = tape.value(p.delta).v[0];
  out.gamma = tape.value(p.gamma).v[0];
  out.K = p.K;
  out.A = p.A;
  out.B = p.B;
  return out;
}

}  // namespace dcc
