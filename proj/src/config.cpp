#include "dcc/config.hpp"

#include <cstdlib>
#include <fstream>

#include "dcc/errors.hpp"

namespace dcc {

namespace {
std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": " + v);
}
}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  try {
    if (key == "model.fusion") fusion = value;
    else if (key == "model.classes") classes = std::stoi(value);
    else if (key == "model.input_side") input_side = std::stoi(value);
    else if (key == "glimpse.K") glimpse_k = std::stoi(value);
    else if (key == "glimpse.kernel") glimpse_kernel = value;
    else if (key == "glimpse.eq7_division") eq7_division = parse_bool(value, key);
    else if (key == "comparator.hidden") hidden = std::stoi(value);
    else if (key == "comparator.glimpses") glimpses = std::stoi(value);
    else if (key == "comparator.dropout") dropout = std::stod(value);
    else if (key == "train.batch") batch = std::stoi(value);
    else if (key == "train.base_lr") base_lr = std::stod(value);
    else if (key == "train.decay") decay = std::stod(value);
    else if (key == "train.clip") clip = std::stod(value);
    else if (key == "train.clip_mode") clip_mode = value;
    else if (key == "train.epochs") epochs = std::stoi(value);
    else if (key == "train.steps_per_epoch") steps_per_epoch = std::stoi(value);
    else if (key == "train.early_stop_acc") early_stop_acc = std::stod(value);
    else if (key == "train.checkpoint_every") checkpoint_every = std::stoi(value);
    else if (key == "train.seed") seed = std::stoull(value);
    else if (key == "eval.trials") trials = std::stoi(value);
    else if (key == "data.ids") ids = std::stoi(value);
    else if (key == "data.views") views = std::stoi(value);
    else throw ConfigError("unknown config key: " + key);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    apply(section.empty() ? key : section + "." + key, value);
  }
}

void RunConfig::validate() const {
  if (fusion != "dcc" && fusion != "spp" && fusion != "gp")
    throw ConfigError("model.fusion must be dcc|spp|gp, got " + fusion);
  if (glimpse_kernel != "cauchy" && glimpse_kernel != "gaussian")
    throw ConfigError("glimpse.kernel must be cauchy|gaussian");
  if (clip_mode != "sum" && clip_mode != "global")
    throw ConfigError("train.clip_mode must be sum|global");
  if (classes < 2) throw ConfigError("model.classes must be >= 2");
  if (input_side < 8) throw ConfigError("model.input_side must be >= 8");
  if (glimpse_k < 1) throw ConfigError("glimpse.K must be >= 1");
  if (hidden < 1) throw ConfigError("comparator.hidden must be >= 1");
  if (glimpses < 1) throw ConfigError("comparator.glimpses must be >= 1");
  if (dropout < 0 || dropout >= 1)
    throw ConfigError("comparator.dropout must be in [0,1)");
  if (batch < 1) throw ConfigError("train.batch must be >= 1");
  if (base_lr <= 0) throw ConfigError("train.base_lr must be positive");
  if (decay <= 0 || decay >= 1)
    throw ConfigError("train.decay must be in (0,1)");
  if (clip <= 0) throw ConfigError("train.clip must be positive");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (trials < 1) throw ConfigError("eval.trials must be >= 1");
  if (ids < 1) throw ConfigError("data.ids must be >= 1");
  if (views < 1) throw ConfigError("data.views must be >= 1");
}

ModelConfig RunConfig::model_config() const {
  validate();
  ModelConfig mc;
  mc.fusion = fusion_from_string(fusion);
  mc.classes = classes;
  mc.encoder.input_side = input_side;
  mc.comparator.hidden = hidden;
  mc.comparator.glimpses = glimpses;
  mc.comparator.dropout = dropout;
  mc.comparator.glimpse.K = glimpse_k;
  mc.comparator.glimpse.kernel = glimpse_kernel == "gaussian"
                                     ? GlimpseConfig::Gaussian
                                     : GlimpseConfig::Cauchy;
  mc.comparator.glimpse.eq7_division = eq7_division;
  mc.encoder.derive_output();
  return mc;
}

TrainConfig RunConfig::train_config() const {
  validate();
  TrainConfig tc;
  tc.batch = batch;
  tc.base_lr = base_lr;
  tc.decay = decay;
  tc.clip_threshold = clip;
  tc.clip_global_norm = clip_mode == "global";
  tc.epochs = epochs;
  tc.steps_per_epoch = steps_per_epoch;
  tc.seed = seed;
  tc.early_stop_acc = early_stop_acc;
  tc.checkpoint_every = checkpoint_every;
  return tc;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("DCC_SEED");
  if (!env) return 0;
  try {
    return std::stoull(env);
  } catch (...) {
    throw ConfigError(std::string("bad DCC_SEED value: ") + env);
  }
}

}  // namespace dcc
