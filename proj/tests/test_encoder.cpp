#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "dcc/encoder.hpp"
#include "dcc/errors.hpp"

using namespace dcc;

namespace {

std::string temp_path(const char* name) {
  return std::string("enc_test_") + name;
}

}  // namespace

TEST_CASE("stem maps 56x56 input to 32x7x7 features") {
  EncoderConfig cfg;  // default schedule: conv/2, pool/2, conv/2
  cfg.derive_output();
  CHECK(cfg.out_channels == 32);
  CHECK(cfg.out_side == 7);

  ParamStore store;
  std::mt19937_64 rng(1);
  init_stem_params(cfg, store, rng);
  Tape tape;
  ParamBinding binding(tape, store);
  Tensor img = Tensor::zeros({3, 56, 56});
  for (Eigen::Index i = 0; i < img.v.size(); ++i)
    img.v[i] = (i % 97) / 96.0;
  FeatureVar f = encode(tape, img, cfg, binding);
  CHECK(f.channels == 32);
  CHECK(f.side == 7);
  CHECK(tape.value(f.var).rows() == 32);
  CHECK(tape.value(f.var).cols() == 49);
}

TEST_CASE("all-zero image encodes to finite features") {
  EncoderConfig cfg;
  cfg.derive_output();
  ParamStore store;
  std::mt19937_64 rng(2);
  init_stem_params(cfg, store, rng);
  Tape tape;
  ParamBinding binding(tape, store);
  FeatureVar f = encode(tape, Tensor::zeros({3, 56, 56}), cfg, binding);
  CHECK(tape.value(f.var).finite());
}

TEST_CASE("encode rejects wrong image size and out-of-range values") {
  EncoderConfig cfg;
  cfg.derive_output();
  ParamStore store;
  std::mt19937_64 rng(3);
  init_stem_params(cfg, store, rng);
  Tape tape;
  ParamBinding binding(tape, store);
  CHECK_THROWS_AS(encode(tape, Tensor::zeros({3, 28, 28}), cfg, binding),
                  ShapeError);
  Tensor bad = Tensor::zeros({3, 56, 56});
  bad.v[0] = 1.5;
  CHECK_THROWS_AS(encode(tape, bad, cfg, binding), ContractError);
}

TEST_CASE("encode is deterministic given fixed parameters") {
  EncoderConfig cfg;
  cfg.derive_output();
  ParamStore store;
  std::mt19937_64 rng(4);
  init_stem_params(cfg, store, rng);
  Tensor img = Tensor::zeros({3, 56, 56});
  for (Eigen::Index i = 0; i < img.v.size(); ++i) img.v[i] = (i % 13) / 12.0;
  Eigen::ArrayXd a, b;
  {
    Tape tape;
    ParamBinding binding(tape, store);
    a = tape.value(encode(tape, img, cfg, binding).var).v;
  }
  {
    Tape tape;
    ParamBinding binding(tape, store);
    b = tape.value(encode(tape, img, cfg, binding).var).v;
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("feature file round trip is bit exact") {
  std::string path = temp_path("roundtrip.feat");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-2, 2);
  Tensor fmap = Tensor::zeros({8, 4, 4});
  for (auto& v : fmap.v) v = d(rng);
  save_feature_file(path, fmap);
  Tensor back = load_feature_file(path);
  REQUIRE(back.shape == fmap.shape);
  for (Eigen::Index i = 0; i < fmap.v.size(); ++i) CHECK(back.v[i] == fmap.v[i]);
  std::remove(path.c_str());
}

TEST_CASE("feature file supports the paper-shape 1024x14x14 manifest") {
  std::string path = temp_path("paper.feat");
  Tensor fmap = Tensor::zeros({1024, 14, 14});
  fmap.v[12345] = 0.5;
  save_feature_file(path, fmap);
  Tensor back = load_feature_file(path);
  CHECK(back.shape == std::vector<int>{1024, 14, 14});
  CHECK(back.v[12345] == 0.5);
  std::remove(path.c_str());
}

TEST_CASE("truncated feature payload is a format error with byte counts") {
  std::string path = temp_path("trunc.feat");
  {
    std::ofstream out(path, std::ios::binary);
    out << "DCCFEAT v1 8 4 4\n";
    std::vector<double> vals(100, 1.0);  // 8*4*4 = 128 expected
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * sizeof(double)));
  }
  CHECK_THROWS_AS(load_feature_file(path), FormatError);
  try {
    load_feature_file(path);
  } catch (const FormatError& e) {
    std::string msg = e.what();
    CHECK(msg.find("1024") != std::string::npos);  // 128 doubles = 1024 bytes
    CHECK(msg.find("800") != std::string::npos);   // got 100 doubles = 800
  }
  std::remove(path.c_str());
}

TEST_CASE("empty feature file is a format error") {
  std::string path = temp_path("empty.feat");
  std::ofstream(path).close();
  CHECK_THROWS_AS(load_feature_file(path), FormatError);
  std::remove(path.c_str());
}
