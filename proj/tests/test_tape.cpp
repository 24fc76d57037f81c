#include <doctest.h>

#include <random>

#include "dcc/errors.hpp"
#include "dcc/gradcheck.hpp"
#include "dcc/tape.hpp"

using namespace dcc;

TEST_CASE("matmul identity") {
  Tape t;
  Var i2 = t.leaf(Tensor({2, 2}, {1, 0, 0, 1}));
  Var m = t.leaf(Tensor({2, 2}, {1, 2, 3, 4}));
  const Tensor& out = t.value(matmul(t, i2, m));
  CHECK(out.v[0] == 1);
  CHECK(out.v[1] == 2);
  CHECK(out.v[2] == 3);
  CHECK(out.v[3] == 4);
}

TEST_CASE("matmul hand arithmetic") {
  Tape t;
  Var a = t.leaf(Tensor({2, 2}, {1, 2, 3, 4}));
  Var b = t.leaf(Tensor({2, 1}, {5, 6}));
  const Tensor& out = t.value(matmul(t, a, b));
  CHECK(out.v[0] == 17);
  CHECK(out.v[1] == 39);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape t;
  Var a = t.leaf(Tensor::zeros({2, 3}));
  Var b = t.leaf(Tensor::zeros({2, 3}));
  CHECK_THROWS_AS(matmul(t, a, b), ShapeError);
  try {
    matmul(t, a, b);
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
}

TEST_CASE("softmax_rows uniform input") {
  Tape t;
  const Tensor& out = t.value(softmax_rows(t, t.leaf(Tensor({1, 3}, {0, 0, 0}))));
  for (int i = 0; i < 3; ++i) CHECK(out.v[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("softmax_rows hand evaluation") {
  Tape t;
  const Tensor& out =
      t.value(softmax_rows(t, t.leaf(Tensor({1, 2}, {0.0, std::log(2.0)}))));
  CHECK(out.v[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(out.v[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("softmax_rows stable under large inputs") {
  Tape t;
  const Tensor& out =
      t.value(softmax_rows(t, t.leaf(Tensor({1, 2}, {1000.0, 1000.0}))));
  CHECK(out.v[0] == 0.5);
  CHECK(out.v[1] == 0.5);
}

TEST_CASE("softmax_rows rows sum to one and shift invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-3, 3);
  Tensor x = Tensor::zeros({4, 5});
  for (auto& v : x.v) v = d(rng);
  Tape t;
  const Tensor& y = t.value(softmax_rows(t, t.leaf(x)));
  for (int r = 0; r < 4; ++r) {
    double s = y.v.segment(r * 5, 5).sum();
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  Tensor shifted = x;
  shifted.v += 7.25;
  Tape t2;
  const Tensor& y2 = t2.value(softmax_rows(t2, t2.leaf(shifted)));
  for (int i = 0; i < 20; ++i)
    CHECK(std::abs(y.v[i] - y2.v[i]) < 1e-12);
}

TEST_CASE("backward of x squared at 3") {
  Tape t;
  Var x = t.leaf(Tensor::scalar(3.0));
  t.backward(mul(t, x, x));
  CHECK(t.grad(x)[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  Var x = t.leaf(Tensor({2}, {1, 2}));
  CHECK_THROWS_AS(t.backward(x), ContractError);
}

TEST_CASE("matmul chain gradient vs finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<Tensor> point = {Tensor::zeros({2, 3}), Tensor::zeros({3, 2})};
  for (auto& p : point)
    for (auto& v : p.v) v = d(rng);
  auto f = [](const std::vector<Tensor>& pt) {
    Tape t;
    Var a = t.leaf(pt[0]), b = t.leaf(pt[1]);
    return t.value(sum_all(t, matmul(t, matmul(t, a, b), a))).v[0];
  };
  std::vector<Eigen::ArrayXd> analytic;
  {
    Tape t;
    Var a = t.leaf(point[0]), b = t.leaf(point[1]);
    t.backward(sum_all(t, matmul(t, matmul(t, a, b), a)));
    analytic = {t.grad(a), t.grad(b)};
  }
  CHECK(fd_check(f, point, analytic).max_rel_error < 1e-6);
}

TEST_CASE("softmax log-loss gradient vs finite differences") {
  std::vector<Tensor> point = {Tensor({1, 4}, {0.3, -0.7, 1.2, 0.1})};
  auto f = [](const std::vector<Tensor>& pt) {
    Tape t;
    Var p = softmax_rows(t, t.leaf(pt[0]));
    return -std::log(t.value(p).v[2]);
  };
  std::vector<Eigen::ArrayXd> analytic;
  {
    Tape t;
    Var x = t.leaf(point[0]);
    Var p = softmax_rows(t, x);
    t.backward(scale(t, log_op(t, select(t, p, 2)), -1.0));
    analytic = {t.grad(x)};
  }
  CHECK(fd_check(f, point, analytic).max_rel_error < 1e-6);
}

TEST_CASE("backward is deterministic bit for bit") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  Tensor x = Tensor::zeros({3, 3});
  for (auto& v : x.v) v = d(rng);
  Eigen::ArrayXd g1, g2;
  for (int run = 0; run < 2; ++run) {
    Tape t;
    Var a = t.leaf(x);
    Var out = sum_all(t, mul(t, softmax_rows(t, a), tanh_op(t, a)));
    t.backward(out);
    (run == 0 ? g1 : g2) = t.grad(a);
  }
  REQUIRE(g1.size() == g2.size());
  for (Eigen::Index i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("finite-check mode flags NaN results") {
  Tape t;
  t.set_check_finite(true);
  Var x = t.leaf(Tensor::scalar(-1.0));
  CHECK_THROWS_AS(log_op(t, x), ContractError);
}
