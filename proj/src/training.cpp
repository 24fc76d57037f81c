#include "dcc/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcc/errors.hpp"

namespace dcc {

double lr_at(long steps_processed, long steps_per_epoch,
             const TrainConfig& cfg) {
  if (steps_per_epoch < 1 || steps_processed < 0)
    throw ContractError("lr_at: need m >= 0 and N >= 1");
  double exponent =
      static_cast<double>(steps_processed) / static_cast<double>(steps_per_epoch);
  return cfg.base_lr * std::pow(cfg.decay, exponent);
}

double clip_gradients(ParamStore& store, double threshold, bool global_norm) {
  double s = 0.0;
  for (const auto& name : store.names()) {
    const auto& g = store.grad(name);
    if (!g.isFinite().all())
      throw TrainError("non-finite gradient in parameter '" + name + "'");
    double sq = (g * g).sum();
    s += global_norm ? sq : std::sqrt(sq);
  }
  if (global_norm) s = std::sqrt(s);
  if (s > threshold) {
    double factor = threshold / s;
    for (const auto& name : store.names()) store.grad(name) *= factor;
    return threshold;
  }
  return s;
}

void adam_step(ParamStore& store, AdamState& state, double lr,
               const TrainConfig& cfg) {
  ++state.t;
  double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  double bc1 = 1.0 - std::pow(b1, state.t);
  double bc2 = 1.0 - std::pow(b2, state.t);
  for (const auto& name : store.names()) {
    const auto& g = store.grad(name);
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.size() == 0) {
      m = Eigen::ArrayXd::Zero(g.size());
      v = Eigen::ArrayXd::Zero(g.size());
    }
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    store.at(name).v -= lr * (m / bc1) / ((v / bc2).sqrt() + cfg.adam_eps);
  }
}

namespace {

void write_tensor_block(std::ostream& out,
                        const std::vector<std::pair<std::string, const Eigen::ArrayXd*>>& tensors,
                        const std::vector<std::vector<int>>& shapes) {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    out << "tensor " << tensors[i].first << " " << shapes[i].size();
    for (int d : shapes[i]) out << " " << d;
    out << " " << offset << "\n";
    offset += static_cast<std::size_t>(tensors[i].second->size());
  }
}

std::string config_lines(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "config fusion " << fusion_to_string(cfg.fusion) << "\n";
  os << "config classes " << cfg.classes << "\n";
  os << "config input_side " << cfg.encoder.input_side << "\n";
  os << "config hidden " << cfg.comparator.hidden << "\n";
  os << "config glimpses " << cfg.comparator.glimpses << "\n";
  os << "config dropout " << cfg.comparator.dropout << "\n";
  os << "config glimpse_k " << cfg.comparator.glimpse.K << "\n";
  os << "config glimpse_kernel "
     << (cfg.comparator.glimpse.kernel == GlimpseConfig::Cauchy ? "cauchy"
                                                                : "gaussian")
     << "\n";
  os << "config eq7_division " << (cfg.comparator.glimpse.eq7_division ? 1 : 0)
     << "\n";
  os << "config stem";
  for (const auto& st : cfg.encoder.stages) {
    if (st.kind == StemStage::Conv)
      os << " conv:" << st.out_channels << ":" << st.stride;
    else
      os << " pool";
  }
  os << "\n";
  return os.str();
}

void apply_config_line(ModelConfig& cfg, const std::string& key,
                       const std::string& value) {
  if (key == "fusion") cfg.fusion = fusion_from_string(value);
  else if (key == "classes") cfg.classes = std::stoi(value);
  else if (key == "input_side") cfg.encoder.input_side = std::stoi(value);
  else if (key == "hidden") cfg.comparator.hidden = std::stoi(value);
  else if (key == "glimpses") cfg.comparator.glimpses = std::stoi(value);
  else if (key == "dropout") cfg.comparator.dropout = std::stod(value);
  else if (key == "glimpse_k") cfg.comparator.glimpse.K = std::stoi(value);
  else if (key == "glimpse_kernel")
    cfg.comparator.glimpse.kernel = value == "gaussian"
                                        ? GlimpseConfig::Gaussian
                                        : GlimpseConfig::Cauchy;
  else if (key == "eq7_division")
    cfg.comparator.glimpse.eq7_division = value == "1";
  else if (key == "stem") {
    cfg.encoder.stages.clear();
    std::istringstream ss(value);
    std::string tok;
    while (ss >> tok) {
      if (tok == "pool") {
        cfg.encoder.stages.push_back({StemStage::Pool, 0, 1});
      } else if (tok.rfind("conv:", 0) == 0) {
        auto c1 = tok.find(':'), c2 = tok.find(':', c1 + 1);
        cfg.encoder.stages.push_back(
            {StemStage::Conv, std::stoi(tok.substr(c1 + 1, c2 - c1 - 1)),
             std::stoi(tok.substr(c2 + 1))});
      } else {
        throw FormatError("bad stem token in checkpoint: " + tok);
      }
    }
  } else {
    throw FormatError("unknown checkpoint config key: " + key);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const DccModel& model,
                     const AdamState& adam, long step,
                     const std::mt19937_64& rng) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for write: " + path);
  out << "DCCKPT v1\n";
  out << config_lines(model.config());
  out << "step " << step << "\n";
  out << "adam_t " << adam.t << "\n";
  out << "rng " << rng << "\n";

  std::vector<std::pair<std::string, const Eigen::ArrayXd*>> tensors;
  std::vector<std::vector<int>> shapes;
  const auto& store = model.params();
  for (const auto& name : store.names()) {
    const Tensor& t = store.at(name);
    tensors.emplace_back(name, &t.v);
    shapes.push_back(t.shape);
    auto mi = adam.m.find(name);
    if (mi != adam.m.end() && mi->second.size() > 0) {
      tensors.emplace_back("adam.m." + name, &mi->second);
      shapes.push_back({static_cast<int>(mi->second.size())});
      tensors.emplace_back("adam.v." + name, &adam.v.at(name));
      shapes.push_back({static_cast<int>(mi->second.size())});
    }
  }
  out << "tensors " << tensors.size() << "\n";
  write_tensor_block(out, tensors, shapes);
  out << "payload\n";
  for (const auto& [name, arr] : tensors)
    out.write(reinterpret_cast<const char*>(arr->data()),
              static_cast<std::streamsize>(arr->size() * sizeof(double)));
  if (!out) throw FormatError("short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "DCCKPT v1")
    throw FormatError("bad checkpoint header in " + path);

  Checkpoint ckpt;
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset;
  };
  std::vector<Entry> entries;
  bool adam_t_from_step = true;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "config") {
      std::string key;
      ss >> key;
      std::string rest;
      std::getline(ss, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      apply_config_line(ckpt.config, key, rest);
    } else if (kind == "step") {
      ss >> ckpt.step;
    } else if (kind == "adam_t") {
      ss >> ckpt.adam.t;
      adam_t_from_step = false;
    } else if (kind == "rng") {
      ss >> ckpt.rng;
    } else if (kind == "tensors") {
      // count line; entries follow
    } else if (kind == "tensor") {
      Entry e;
      int rank = 0;
      ss >> e.name >> rank;
      e.shape.resize(rank);
      for (int i = 0; i < rank; ++i) ss >> e.shape[i];
      ss >> e.offset;
      entries.push_back(std::move(e));
    } else if (kind == "payload") {
      break;
    } else if (!kind.empty()) {
      throw FormatError("unknown checkpoint line: " + line);
    }
  }
  for (const auto& e : entries) {
    Tensor t = Tensor::zeros(e.shape);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(t.v.size() * sizeof(double)))
      throw FormatError("truncated checkpoint payload at tensor " + e.name);
    if (e.name.rfind("adam.m.", 0) == 0)
      ckpt.adam.m[e.name.substr(7)] = t.v;
    else if (e.name.rfind("adam.v.", 0) == 0)
      ckpt.adam.v[e.name.substr(7)] = t.v;
    else
      ckpt.tensors[e.name] = std::move(t);
  }
  if (adam_t_from_step) ckpt.adam.t = ckpt.step;
  return ckpt;
}

DccModel model_from_checkpoint(const Checkpoint& ckpt) {
  DccModel model(ckpt.config, 0);
  for (const auto& name : model.params().names()) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end())
      throw FormatError("checkpoint missing parameter: " + name);
    Tensor& dst = model.params().at(name);
    if (dst.shape != it->second.shape)
      throw FormatError("checkpoint shape mismatch for " + name + ": " +
                        Tensor::shape_str(it->second.shape) + " vs model " +
                        Tensor::shape_str(dst.shape));
    dst.v = it->second.v;
  }
  return model;
}

TrainResult train(DccModel& model, const Dataset& dataset,
                  const TrainConfig& cfg, const std::string& checkpoint_path,
                  const std::string& metrics_path,
                  const std::function<void(long, double, double)>& on_step) {
  if (dataset.num_identities() < model.config().classes)
    throw DataError("dataset has " + std::to_string(dataset.num_identities()) +
                    " identities, need >= " +
                    std::to_string(model.config().classes));
  long n = cfg.steps_per_epoch > 0
               ? cfg.steps_per_epoch
               : std::max<long>(1, static_cast<long>(dataset.items.size()) /
                                       cfg.batch);
  std::mt19937_64 rng(cfg.seed);
  AdamState adam;
  std::ofstream metrics(metrics_path);
  if (!metrics) throw FormatError("cannot open metrics log: " + metrics_path);

  TrainResult result;
  long m = 0;
  double running_acc = 0.0;
  bool have_running = false;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (long s = 0; s < n; ++s) {
      model.params().zero_grads();
      double loss_sum = 0;
      int correct = 0;
      for (int bi = 0; bi < cfg.batch; ++bi) {
        Episode ep = make_episode(dataset, model.config().classes, rng);
        EpisodeResult er = model.episode_loss(ep, /*training=*/true, rng);
        if (!std::isfinite(er.loss)) {
          save_checkpoint(checkpoint_path + ".lastgood", model, adam, m, rng);
          throw TrainError("non-finite loss at step " + std::to_string(m) +
                           "; last good checkpoint: " + checkpoint_path +
                           ".lastgood");
        }
        loss_sum += er.loss;
        if (er.predicted == ep.true_index) ++correct;
      }
      // mean over the batch
      for (const auto& name : model.params().names())
        model.params().grad(name) /= cfg.batch;
      clip_gradients(model.params(), cfg.clip_threshold, cfg.clip_global_norm);
      double lr = lr_at(m, n, cfg);
      adam_step(model.params(), adam, lr, cfg);
      ++m;

      double loss = loss_sum / cfg.batch;
      double acc = static_cast<double>(correct) / cfg.batch;
      running_acc = have_running ? 0.9 * running_acc + 0.1 * acc : acc;
      have_running = true;
      metrics << m << "," << loss << "," << acc << "," << lr << "\n";
      if (on_step) on_step(m, loss, acc);
      result.final_loss = loss;
      result.final_acc = running_acc;
      if (cfg.checkpoint_every > 0 && m % cfg.checkpoint_every == 0)
        save_checkpoint(checkpoint_path, model, adam, m, rng);
      if (cfg.early_stop_acc > 0 && running_acc > cfg.early_stop_acc) {
        result.steps = m;
        save_checkpoint(checkpoint_path, model, adam, m, rng);
        result.checkpoint_path = checkpoint_path;
        return result;
      }
    }
  }
  result.steps = m;
  save_checkpoint(checkpoint_path, model, adam, m, rng);
  result.checkpoint_path = checkpoint_path;
  return result;
}

}  // namespace dcc
