#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "dcc/errors.hpp"
#include "dcc/evaluation.hpp"
#include "dcc/tape.hpp"

using namespace dcc;

TEST_CASE("perfect ranking gives an all-ones curve") {
  RowMat sim(2, 3);
  sim << 0.9, 0.1, 0.2,
         0.0, 0.8, 0.1;
  std::vector<double> curve = cmc(sim, {0, 1}, {0, 1, 2});
  for (double v : curve) CHECK(v == 1.0);
}

TEST_CASE("hand-ranked queries at ranks 1 and 2") {
  RowMat sim(2, 2);
  sim << 0.9, 0.1,   // query 0: match (gallery 0) at rank 1
         0.7, 0.3;   // query 1: match (gallery 1) at rank 2
  std::vector<double> curve = cmc(sim, {0, 1}, {0, 1});
  CHECK(curve[0] == 0.5);
  CHECK(curve[1] == 1.0);
}

TEST_CASE("cmc curves never decrease") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    RowMat sim(4, 6);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 6; ++j) sim(i, j) = d(rng);
    std::vector<double> curve = cmc(sim, {0, 1, 2, 3}, {0, 1, 2, 3, 0, 1});
    for (std::size_t k = 1; k < curve.size(); ++k)
      CHECK(curve[k] >= curve[k - 1]);
    CHECK(curve.back() == 1.0);
  }
}

TEST_CASE("ties resolve toward the lower gallery index") {
  RowMat sim(1, 3);
  sim << 0.5, 0.5, 0.5;  // all tied; match at gallery 1 ranks second
  std::vector<double> curve = cmc(sim, {7}, {3, 7, 9});
  CHECK(curve[0] == 0.0);
  CHECK(curve[1] == 1.0);
}

TEST_CASE("query without a gallery match is a protocol error") {
  RowMat sim(1, 2);
  sim << 0.5, 0.4;
  CHECK_THROWS_AS(cmc(sim, {9}, {0, 1}), ProtocolError);
  CHECK_THROWS_AS(map_score(sim, {9}, {0, 1}), ProtocolError);
}

TEST_CASE("perfect single-match ranking has mAP 1") {
  RowMat sim(2, 2);
  sim << 0.9, 0.1,
         0.2, 0.8;
  CHECK(map_score(sim, {0, 1}, {0, 1}) == 1.0);
}

TEST_CASE("two matches at positions 1 and 3 give AP 5/6") {
  RowMat sim(1, 3);
  sim << 0.9, 0.5, 0.7;  // ranking: gallery 0 (match), 2, 1 (match)
  CHECK(map_score(sim, {4}, {4, 4, 8}) == doctest::Approx(5.0 / 6).epsilon(1e-12));
}

TEST_CASE("reversed ranking with one match in two gives AP one half") {
  RowMat sim(1, 2);
  sim << 0.1, 0.9;  // match at gallery 0 ranks last
  CHECK(map_score(sim, {3}, {3, 5}) == 0.5);
}

TEST_CASE("metrics are invariant under increasing similarity transforms") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(0, 1);
  RowMat sim(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) sim(i, j) = d(rng);
  std::vector<int> q = {0, 1, 2}, g = {0, 1, 2, 0, 1};
  RowMat warped = sim.unaryExpr([](double v) { return std::exp(3 * v) - 2; });
  CHECK(cmc(sim, q, g) == cmc(warped, q, g));
  CHECK(map_score(sim, q, g) == doctest::Approx(map_score(warped, q, g)).epsilon(1e-12));
}

TEST_CASE("spp and global pooling match hand values") {
  Tape t;
  Var z = t.leaf(Tensor({1, 4}, {1, 2, 3, 4}));  // 2x2 map [[1,2],[3,4]]
  const Tensor& spp = t.value(spp_max(t, z, 2));
  REQUIRE(spp.size() == 5);
  CHECK(spp.v[0] == 1);  // quadrant maxes in row-major quadrant order
  CHECK(spp.v[1] == 2);
  CHECK(spp.v[2] == 3);
  CHECK(spp.v[3] == 4);
  CHECK(spp.v[4] == 4);  // global max
  const Tensor& gp = t.value(row_sum(t, z));
  CHECK(gp.v[0] / 4 == 2.5);
}

TEST_CASE("constant maps pool to the constant everywhere") {
  Tape t;
  Tensor z = Tensor::zeros({3, 9});
  z.v.setConstant(0.7);
  const Tensor& spp = t.value(spp_max(t, t.leaf(z), 3));
  REQUIRE(spp.size() == 15);  // 5 bins per channel
  for (Eigen::Index i = 0; i < spp.size(); ++i) CHECK(spp.v[i] == 0.7);
}

TEST_CASE("channel permutation permutes the pooled bins") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  Tensor z = Tensor::zeros({2, 9});
  for (auto& v : z.v) v = d(rng);
  Tensor swapped = Tensor::zeros({2, 9});
  swapped.v.segment(0, 9) = z.v.segment(9, 9);
  swapped.v.segment(9, 9) = z.v.segment(0, 9);
  Tape t;
  Tensor a = t.value(spp_max(t, t.leaf(z), 3));
  Tensor b = t.value(spp_max(t, t.leaf(swapped), 3));
  for (int i = 0; i < 5; ++i) {
    CHECK(a.v[i] == b.v[5 + i]);
    CHECK(a.v[5 + i] == b.v[i]);
  }
}

namespace {

Dataset toy_dataset(int ids, int cams, std::uint64_t seed) {
  Dataset d;
  d.side = 4;
  std::mt19937_64 rng(seed);
  for (int id = 0; id < ids; ++id)
    for (int cam = 0; cam < cams; ++cam) {
      DatasetItem item;
      item.identity = id;
      item.camera = cam;
      item.index = 0;
      item.image = Image(4, 4, (id + 1) * 0.1);
      d.items.push_back(item);
    }
  return d;
}

}  // namespace

TEST_CASE("single trial equals a direct cmc call") {
  Dataset probes = toy_dataset(3, 1, 1);
  Dataset gallery;
  gallery.side = 4;
  for (auto item : toy_dataset(3, 1, 2).items) {
    item.camera = 1;
    gallery.items.push_back(item);
  }
  // deterministic scorer keyed on the constant fill value
  auto scorer = [](const DatasetItem& a, const DatasetItem& b) {
    return -std::abs(a.image.px[0] - b.image.px[0]);
  };
  EvalResult r = evaluate(scorer, probes, gallery, 1, 5);
  CHECK(r.rank1 == 1.0);
  CHECK(r.map == 1.0);
  CHECK(r.trials == 1);
}

TEST_CASE("fixed seeds reproduce the evaluation exactly") {
  Dataset probes = toy_dataset(4, 1, 1);
  Dataset gallery = toy_dataset(4, 2, 2);
  for (auto& item : gallery.items) item.camera += 1;
  std::mt19937_64 noise(9);
  std::uniform_real_distribution<double> d(0, 1);
  RowMat table(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) table(i, j) = d(noise);
  auto scorer = [&](const DatasetItem& a, const DatasetItem& b) {
    return table(a.identity, b.identity) + 0.01 * b.camera;
  };
  EvalResult r1 = evaluate(scorer, probes, gallery, 5, 77);
  EvalResult r2 = evaluate(scorer, probes, gallery, 5, 77);
  CHECK(r1.cmc == r2.cmc);
  CHECK(r1.map == r2.map);
}

TEST_CASE("missing gallery identity is a protocol error naming it") {
  Dataset probes = toy_dataset(3, 1, 1);
  Dataset gallery = toy_dataset(2, 1, 2);  // identity 2 absent
  for (auto& item : gallery.items) item.camera = 1;
  auto scorer = [](const DatasetItem&, const DatasetItem&) { return 0.0; };
  try {
    evaluate(scorer, probes, gallery, 1, 1);
    CHECK(false);
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("report and json outputs carry the rank table") {
  EvalResult r;
  r.cmc = {0.5, 0.75, 1.0};
  r.trials = 2;
  r.map = 0.625;
  fill_ranks(r);
  CHECK(r.rank1 == 0.5);
  CHECK(r.rank5 == 1.0);   // clamped to the curve end
  CHECK(r.rank20 == 1.0);
  std::string report = format_report(r);
  CHECK(report.find("R=1") != std::string::npos);
  CHECK(report.find("mAP") != std::string::npos);
  write_result_json(r, "eval_test.json");
  std::ifstream in("eval_test.json");
  std::string body((std::istreambuf_iterator<char>(in)), {});
  CHECK(body.find("\"mAP\"") != std::string::npos);
  CHECK(body.find("0.625") != std::string::npos);
  std::remove("eval_test.json");
}
