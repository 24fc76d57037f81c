#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "dcc/config.hpp"
#include "dcc/errors.hpp"

using namespace dcc;

TEST_CASE("sectioned key-value files parse with comments") {
  std::string path = "config_test_ok.ini";
  {
    std::ofstream out(path);
    out << "# front matter\n"
        << "[model]\n"
        << "fusion = spp\n"
        << "classes = 5\n"
        << "\n"
        << "[train]\n"
        << "base_lr = 0.002\n"
        << "[glimpse]\n"
        << "kernel = gaussian\n"
        << "eq7_division = true\n";
  }
  RunConfig cfg;
  cfg.load_file(path);
  CHECK(cfg.fusion == "spp");
  CHECK(cfg.classes == 5);
  CHECK(cfg.base_lr == 0.002);
  CHECK(cfg.glimpse_kernel == "gaussian");
  CHECK(cfg.eq7_division);
  std::remove(path.c_str());
}

TEST_CASE("unknown keys are rejected by name") {
  std::string path = "config_test_bad.ini";
  std::ofstream(path) << "[model]\nfushion = dcc\n";
  RunConfig cfg;
  try {
    cfg.load_file(path);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("fushion") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("missing config file is a config error") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.load_file("does_not_exist.toml"), ConfigError);
}

TEST_CASE("validation rejects out-of-range values") {
  RunConfig cfg;
  cfg.ids = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.ids = 4;
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.dropout = 0.3;
  cfg.decay = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.decay = 0.88;
  cfg.fusion = "bilinear";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.fusion = "gp";
  cfg.validate();
}

TEST_CASE("config maps onto model and train settings") {
  RunConfig cfg;
  cfg.fusion = "dcc";
  cfg.hidden = 12;
  cfg.glimpses = 4;
  cfg.glimpse_k = 3;
  cfg.clip_mode = "global";
  ModelConfig mc = cfg.model_config();
  CHECK(mc.comparator.hidden == 12);
  CHECK(mc.comparator.glimpses == 4);
  CHECK(mc.comparator.glimpse.K == 3);
  TrainConfig tc = cfg.train_config();
  CHECK(tc.clip_global_norm);
  CHECK(tc.base_lr == 0.001);
}

TEST_CASE("DCC_SEED drives the default seed") {
  setenv("DCC_SEED", "12345", 1);
  CHECK(default_seed() == 12345);
  unsetenv("DCC_SEED");
  CHECK(default_seed() == 0);
}
