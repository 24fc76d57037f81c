#pragma once

#include <vector>

#include "dcc/tape.hpp"

namespace dcc {

struct GlimpseConfig {
  int K = 2;
  enum Kernel { Cauchy, Gaussian } kernel = Cauchy;
  bool eq7_division = false;  // strict-paper stride placement
};

// Unpacked attention window on the tape. A and B are the attended grid width
// and height (equal to M on feature maps).
struct GlimpseVars {
  Var g_x, g_y, delta, gamma;
  int K = 0, A = 0, B = 0;
};

// Plain-value snapshot for trajectory logging.
struct GlimpseParams {
  double g_x = 0, g_y = 0, delta = 0, gamma = 0;
  int K = 0, A = 0, B = 0;
};

struct FilterbankVars {
  Var F_X;  // K x A, row-stochastic
  Var F_Y;  // K x B, row-stochastic
};

// raw = (g_x^, g_y^, delta^):
//   g_x = (A-1)(g_x^+1)/2, g_y = (B-1)(g_y^+1)/2,
//   delta = max(A,B)/(K-1) * |delta^| clamped below at 1e-6 (K=1 drops the
//   K-1 divisor), gamma = e^(1 - 2|delta^|).
GlimpseVars unpack_glimpse(Tape& tape, Var raw, int a, int b, int k);

// Filter centers mu_i = g + (i - K/2 - 0.5) * delta (i 1-based); division by
// delta instead when eq7_division is set. Kernel rows are normalized to sum 1.
FilterbankVars filterbanks(Tape& tape, const GlimpseVars& p,
                           const GlimpseConfig& cfg);

// Per channel c of the C x M^2 summary: G[c] = F_Y * Z[c] * F_X^T on the M x M
// reshape, all scaled once by gamma. Returns a C*K*K vector.
Var extract_glimpse(Tape& tape, const GlimpseVars& p, const FilterbankVars& fb,
                    Var z, int channels, int m);

GlimpseParams read_params(const Tape& tape, const GlimpseVars& p);

// Numeric K x extent filterbank rebuilt from a logged window; matches the
// tape computation row for row.
RowMat filterbank_matrix(const GlimpseParams& p, int extent,
                         const GlimpseConfig& cfg, bool x_axis);

// Inclusive cell range along one axis holding every cell that some filter
// weights at least frac/extent (frac of the uniform weight). The pair is the
// visualized window extent; a near-flat filterbank yields the whole grid.
std::pair<int, int> window_cells(const GlimpseParams& p, int extent,
                                 const GlimpseConfig& cfg, bool x_axis,
                                 double frac = 0.1);

}  // namespace dcc
