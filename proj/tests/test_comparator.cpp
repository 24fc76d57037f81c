#include <doctest.h>

#include <cmath>
#include <random>

#include "dcc/comparator.hpp"
#include "dcc/errors.hpp"

using namespace dcc;

namespace {

Tensor random_mat(int r, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1, 1);
  Tensor t = Tensor::zeros({r, c});
  for (auto& v : t.v) v = d(rng);
  return t;
}

}  // namespace

TEST_CASE("stream selection alternates a,b by parity") {
  Tape t;
  Var za = t.leaf(Tensor::scalar(1.0));
  Var zb = t.leaf(Tensor::scalar(2.0));
  CHECK(select_stream(0, za, zb).id == za.id);
  CHECK(select_stream(1, za, zb).id == zb.id);
  CHECK(select_stream(15, za, zb).id == zb.id);
  for (int i = 0; i < 16; ++i)
    CHECK(select_stream(i, za, zb).id == (i % 2 == 0 ? za.id : zb.id));
}

TEST_CASE("zero state and zero bias center the first glimpse on the grid") {
  ComparatorConfig cfg;
  cfg.hidden = 4;
  cfg.glimpses = 1;
  cfg.dropout = 0.0;
  ParamStore store;
  std::mt19937_64 rng(1);
  init_comparator_params(cfg, 2, store, rng);
  Tape tape;
  ParamBinding binding(tape, store);
  std::mt19937_64 data_rng(2);
  Var za = tape.leaf(random_mat(2, 49, data_rng));
  Var zb = tape.leaf(random_mat(2, 49, data_rng));
  CompareResult res = compare(tape, za, zb, cfg, 2, 7, binding);
  REQUIRE(!res.trajectory.empty());
  const GlimpseParams& first = res.trajectory[0];
  CHECK(std::abs(first.g_x - 3.0) < 1e-9);  // (A-1)/2 with A = 7
  CHECK(std::abs(first.g_y - 3.0) < 1e-9);
  // the window spans the full grid: every cell gets a non-negligible share
  // of some filter row (the near-flat kernel realizes full coverage)
  auto [lo, hi] = window_cells(first, 7, cfg.glimpse, true);
  CHECK(lo == 0);
  CHECK(hi == 6);
}

TEST_CASE("glimpse parameters differ across steps once the state moves") {
  ComparatorConfig cfg;
  cfg.hidden = 4;
  cfg.glimpses = 1;
  cfg.dropout = 0.0;
  ParamStore store;
  std::mt19937_64 rng(3);
  init_comparator_params(cfg, 2, store, rng);
  Tape tape;
  ParamBinding binding(tape, store);
  std::mt19937_64 data_rng(4);
  Tensor z = random_mat(2, 9, data_rng);
  Var za = tape.leaf(z);
  CompareResult res = compare(tape, za, za, cfg, 2, 3, binding);
  REQUIRE(res.trajectory.size() == 2);
  // same content on both streams, but h changed after step 0
  bool moved = std::abs(res.trajectory[0].g_x - res.trajectory[1].g_x) > 1e-12 ||
               std::abs(res.trajectory[0].g_y - res.trajectory[1].g_y) > 1e-12 ||
               std::abs(res.trajectory[0].delta - res.trajectory[1].delta) > 1e-12;
  CHECK(moved);
}

TEST_CASE("one step matches a hand-rolled LSTM oracle") {
  // C=1, M=2, K=1, H=2
  ComparatorConfig cfg;
  cfg.hidden = 2;
  cfg.glimpses = 1;
  cfg.dropout = 0.0;
  cfg.glimpse.K = 1;
  ParamStore store;
  std::mt19937_64 rng(5);
  init_comparator_params(cfg, 1, store, rng);
  Tape tape;
  ParamBinding binding(tape, store);
  std::mt19937_64 data_rng(6);
  Tensor z = random_mat(1, 4, data_rng);
  Var za = tape.leaf(z);
  ComparatorState s0 = initial_state(tape, cfg.hidden);
  ComparatorState s1 = step(tape, s0, za, za, cfg, 1, 2, binding);

  // oracle: raw = bias = 0 -> g = (0.5, 0.5), delta^ = 0, gamma = e.
  // K=1 filter rows from the Cauchy kernel at mu = 0.5 over cells {0, 1}
  // are symmetric -> [0.5, 0.5]; the glimpse is the map mean scaled by e.
  double x = std::exp(1.0) * z.v.mean();
  auto sigm = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const Tensor& wi = store.at("cmp.lstm.i.w");
  const Tensor& wf = store.at("cmp.lstm.f.w");
  const Tensor& wg = store.at("cmp.lstm.g.w");
  const Tensor& wo = store.at("cmp.lstm.o.w");
  const Tensor& h1 = tape.value(s1.h);
  for (int r = 0; r < 2; ++r) {
    // h_0 = 0 and biases are zero, so gates depend on the input alone
    double i_g = sigm(wi.v[r] * x);
    double f_g = sigm(wf.v[r] * x);
    double g_g = std::tanh(wg.v[r] * x);
    double o_g = sigm(wo.v[r] * x);
    double c1 = f_g * 0.0 + i_g * g_g;
    double expect = o_g * std::tanh(c1);
    CHECK(h1.v[r] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("compare runs exactly 2G steps and logs 2G windows") {
  for (int g : {1, 3, 8}) {
    ComparatorConfig cfg;
    cfg.hidden = 3;
    cfg.glimpses = g;
    cfg.dropout = 0.0;
    ParamStore store;
    std::mt19937_64 rng(7);
    init_comparator_params(cfg, 2, store, rng);
    Tape tape;
    ParamBinding binding(tape, store);
    std::mt19937_64 data_rng(8);
    Var za = tape.leaf(random_mat(2, 4, data_rng));
    Var zb = tape.leaf(random_mat(2, 4, data_rng));
    CompareResult res = compare(tape, za, zb, cfg, 2, 2, binding);
    CHECK(res.trajectory.size() == static_cast<std::size_t>(2 * g));
  }
}

TEST_CASE("stepping past T is a contract error") {
  ComparatorConfig cfg;
  cfg.hidden = 2;
  cfg.glimpses = 1;
  ParamStore store;
  std::mt19937_64 rng(9);
  init_comparator_params(cfg, 1, store, rng);
  Tape tape;
  ParamBinding binding(tape, store);
  std::mt19937_64 data_rng(10);
  Var z = tape.leaf(random_mat(1, 4, data_rng));
  ComparatorState s = initial_state(tape, cfg.hidden);
  s = step(tape, s, z, z, cfg, 1, 2, binding);
  s = step(tape, s, z, z, cfg, 1, 2, binding);
  CHECK_THROWS_AS(step(tape, s, z, z, cfg, 1, 2, binding), ContractError);
}

TEST_CASE("swapped inputs generally produce a different embedding") {
  ComparatorConfig cfg;
  cfg.hidden = 3;
  cfg.glimpses = 2;
  cfg.dropout = 0.0;
  ParamStore store;
  std::mt19937_64 rng(11);
  init_comparator_params(cfg, 2, store, rng);
  std::mt19937_64 data_rng(12);
  Tensor za = random_mat(2, 9, data_rng), zb = random_mat(2, 9, data_rng);
  Eigen::ArrayXd fwd, swp;
  {
    Tape tape;
    ParamBinding binding(tape, store);
    fwd = tape.value(
        compare(tape, tape.leaf(za), tape.leaf(zb), cfg, 2, 3, binding).h_final).v;
  }
  {
    Tape tape;
    ParamBinding binding(tape, store);
    swp = tape.value(
        compare(tape, tape.leaf(zb), tape.leaf(za), cfg, 2, 3, binding).h_final).v;
  }
  CHECK((fwd - swp).abs().maxCoeff() > 1e-12);
}

TEST_CASE("identical inputs and mask give bit-identical embeddings") {
  ComparatorConfig cfg;
  cfg.hidden = 3;
  cfg.glimpses = 2;
  cfg.dropout = 0.3;
  ParamStore store;
  std::mt19937_64 rng(13);
  init_comparator_params(cfg, 2, store, rng);
  std::mt19937_64 data_rng(14);
  Tensor za = random_mat(2, 9, data_rng), zb = random_mat(2, 9, data_rng);
  Tensor mask = Tensor::vec({1, 0, 1});
  Eigen::ArrayXd h1, h2;
  for (int run = 0; run < 2; ++run) {
    Tape tape;
    ParamBinding binding(tape, store);
    Eigen::ArrayXd& dst = run == 0 ? h1 : h2;
    dst = tape.value(compare(tape, tape.leaf(za), tape.leaf(zb), cfg, 2, 3,
                             binding, mask).h_final).v;
  }
  for (Eigen::Index i = 0; i < h1.size(); ++i) CHECK(h1[i] == h2[i]);
  // inverted dropout: masked-out units are exactly zero, kept units scaled
  CHECK(h1[1] == 0.0);
}
