#include <doctest.h>

#include <random>

#include "dcc/coattention.hpp"
#include "dcc/errors.hpp"

using namespace dcc;

namespace {

Tensor random_mat(int r, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1, 1);
  Tensor t = Tensor::zeros({r, c});
  for (auto& v : t.v) v = d(rng);
  return t;
}

FeatureVar feat(Tape& tape, int channels, int side, const Tensor& q) {
  return FeatureVar{channels, side, tape.leaf(q)};
}

}  // namespace

TEST_CASE("rank-1 affinity is the outer product") {
  Tape t;
  Tensor q({1, 4}, {1, 2, 3, 4});
  FeatureVar qa = feat(t, 1, 2, q), qb = feat(t, 1, 2, q);
  const Tensor& l = t.value(affinity(t, qa, qb, t.leaf(Tensor({1, 1}, {1.0}))));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(l.v[i * 4 + j] == q.v[i] * q.v[j]);
}

TEST_CASE("zero weights give zero affinity") {
  Tape t;
  std::mt19937_64 rng(1);
  FeatureVar qa = feat(t, 2, 2, random_mat(2, 4, rng));
  FeatureVar qb = feat(t, 2, 2, random_mat(2, 4, rng));
  const Tensor& l = t.value(affinity(t, qa, qb, t.leaf(Tensor::zeros({2, 2}))));
  for (Eigen::Index i = 0; i < l.v.size(); ++i) CHECK(l.v[i] == 0.0);
}

TEST_CASE("symmetric weights with equal inputs give symmetric affinity") {
  Tape t;
  std::mt19937_64 rng(2);
  Tensor q = random_mat(2, 4, rng);
  Tensor w({2, 2}, {0.5, -0.3, -0.3, 1.1});
  const Tensor& l =
      t.value(affinity(t, feat(t, 2, 2, q), feat(t, 2, 2, q), t.leaf(w)));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(l.v[i * 4 + j] == doctest::Approx(l.v[j * 4 + i]).epsilon(1e-12));
}

TEST_CASE("channel or side mismatch is a shape error") {
  Tape t;
  std::mt19937_64 rng(3);
  FeatureVar qa = feat(t, 2, 2, random_mat(2, 4, rng));
  FeatureVar qb = feat(t, 3, 2, random_mat(3, 4, rng));
  CHECK_THROWS_AS(affinity(t, qa, qb, t.leaf(Tensor::zeros({2, 2}))), ShapeError);
}

TEST_CASE("zero affinity gives uniform weights and spatial-mean summaries") {
  Tape t;
  std::mt19937_64 rng(4);
  Tensor qa = random_mat(2, 4, rng), qb = random_mat(2, 4, rng);
  CoAttentionVars co = co_attend(t, feat(t, 2, 2, qa), feat(t, 2, 2, qb),
                                 t.leaf(Tensor::zeros({2, 2})));
  const Tensor& aa = t.value(co.A_a);
  for (Eigen::Index i = 0; i < aa.v.size(); ++i)
    CHECK(aa.v[i] == doctest::Approx(0.25).epsilon(1e-12));
  const Tensor& za = t.value(co.Z_a);
  for (int c = 0; c < 2; ++c) {
    double mean = qb.v.segment(c * 4, 4).mean();
    for (int j = 0; j < 4; ++j)
      CHECK(za.v[c * 4 + j] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("identical inputs with identity weights make both summaries equal") {
  Tape t;
  std::mt19937_64 rng(5);
  Tensor q = random_mat(2, 9, rng);
  Tensor eye({2, 2}, {1, 0, 0, 1});
  CoAttentionVars co =
      co_attend(t, feat(t, 2, 3, q), feat(t, 2, 3, q), t.leaf(eye));
  const Tensor& za = t.value(co.Z_a);
  const Tensor& zb = t.value(co.Z_b);
  for (Eigen::Index i = 0; i < za.v.size(); ++i)
    CHECK(std::abs(za.v[i] - zb.v[i]) < 1e-12);
}

TEST_CASE("attention rows are stochastic for arbitrary inputs") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    CoAttentionVars co =
        co_attend(t, feat(t, 2, 3, random_mat(2, 9, rng)),
                  feat(t, 2, 3, random_mat(2, 9, rng)),
                  t.leaf(random_mat(2, 2, rng)));
    for (Var a : {co.A_a, co.A_b}) {
      const Tensor& m = t.value(a);
      for (int r = 0; r < m.rows(); ++r)
        CHECK(std::abs(m.v.segment(r * m.cols(), m.cols()).sum() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("summary columns are convex combinations of the partner's columns") {
  // brute force: recover the coefficients from A and rebuild each column
  std::mt19937_64 rng(7);
  Tape t;
  Tensor qa = random_mat(2, 9, rng), qb = random_mat(2, 9, rng);
  CoAttentionVars co = co_attend(t, feat(t, 2, 3, qa), feat(t, 2, 3, qb),
                                 t.leaf(random_mat(2, 2, rng)));
  const Tensor& aa = t.value(co.A_a);
  const Tensor& za = t.value(co.Z_a);
  for (int col = 0; col < 9; ++col) {
    double sum = 0;
    for (int j = 0; j < 9; ++j) {
      double w = aa.v[col * 9 + j];
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    for (int c = 0; c < 2; ++c) {
      double rebuilt = 0;
      for (int j = 0; j < 9; ++j) rebuilt += aa.v[col * 9 + j] * qb.v[c * 9 + j];
      CHECK(za.v[c * 9 + col] == doctest::Approx(rebuilt).epsilon(1e-10));
    }
  }
}

TEST_CASE("swapping inputs with transposed weights exchanges the roles") {
  std::mt19937_64 rng(8);
  Tensor qa = random_mat(2, 4, rng), qb = random_mat(2, 4, rng);
  Tensor w = random_mat(2, 2, rng);
  Tensor wt = Tensor::zeros({2, 2});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) wt.v[j * 2 + i] = w.v[i * 2 + j];
  Tape t1, t2;
  CoAttentionVars fwd =
      co_attend(t1, feat(t1, 2, 2, qa), feat(t1, 2, 2, qb), t1.leaf(w));
  CoAttentionVars swp =
      co_attend(t2, feat(t2, 2, 2, qb), feat(t2, 2, 2, qa), t2.leaf(wt));
  const Tensor& za = t1.value(fwd.Z_a);
  const Tensor& zb_s = t2.value(swp.Z_b);
  const Tensor& zb = t1.value(fwd.Z_b);
  const Tensor& za_s = t2.value(swp.Z_a);
  for (Eigen::Index i = 0; i < za.v.size(); ++i) {
    CHECK(za.v[i] == doctest::Approx(zb_s.v[i]).epsilon(1e-12));
    CHECK(zb.v[i] == doctest::Approx(za_s.v[i]).epsilon(1e-12));
  }
}
