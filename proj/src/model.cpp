#include "dcc/model.hpp"

#include "dcc/errors.hpp"

namespace dcc {

Fusion fusion_from_string(const std::string& s) {
  if (s == "dcc") return Fusion::Dcc;
  if (s == "spp") return Fusion::Spp;
  if (s == "gp") return Fusion::Gp;
  throw ConfigError("unknown fusion mode: " + s + " (want dcc|spp|gp)");
}

std::string fusion_to_string(Fusion f) {
  switch (f) {
    case Fusion::Dcc: return "dcc";
    case Fusion::Spp: return "spp";
    case Fusion::Gp: return "gp";
  }
  return "dcc";
}

int ModelConfig::embed_dim() const {
  switch (fusion) {
    case Fusion::Dcc: return comparator.hidden;
    case Fusion::Spp: return 2 * feat_channels() * 5;  // [Z_a; Z_b] pooled
    case Fusion::Gp: return 2 * feat_channels();
  }
  return comparator.hidden;
}

DccModel::DccModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.encoder.derive_output();
  std::mt19937_64 rng(seed);
  init_stem_params(cfg_.encoder, params_, rng);
  params_.add("coatt.wl",
              xavier_init({cfg_.feat_channels(), cfg_.feat_channels()}, rng));
  if (cfg_.fusion == Fusion::Dcc)
    init_comparator_params(cfg_.comparator, cfg_.feat_channels(), params_, rng);
  init_head_params(cfg_.embed_dim(), cfg_.classes, params_, rng);
}

Var DccModel::pair_embedding(Tape& tape, ParamBinding& binding,
                             const Tensor& img_a, const Tensor& img_b,
                             const std::optional<Tensor>& dropout_mask,
                             std::vector<GlimpseParams>* trajectory) {
  FeatureVar q_a = encode(tape, img_a, cfg_.encoder, binding);
  FeatureVar q_b = encode(tape, img_b, cfg_.encoder, binding);
  CoAttentionVars co = co_attend(tape, q_a, q_b, binding["coatt.wl"]);
  int m = cfg_.feat_side();
  switch (cfg_.fusion) {
    case Fusion::Dcc: {
      CompareResult res =
          compare(tape, co.Z_a, co.Z_b, cfg_.comparator, cfg_.feat_channels(),
                  m, binding, dropout_mask);
      if (trajectory) *trajectory = res.trajectory;
      return res.h_final;
    }
    case Fusion::Spp:
      return concat(tape,
                    {spp_max(tape, co.Z_a, m), spp_max(tape, co.Z_b, m)});
    case Fusion::Gp: {
      double inv = 1.0 / (m * m);
      return concat(tape, {scale(tape, row_sum(tape, co.Z_a), inv),
                           scale(tape, row_sum(tape, co.Z_b), inv)});
    }
  }
  throw ContractError("unreachable fusion mode");
}

EpisodeResult DccModel::episode_loss(const Episode& episode, bool training,
                                     std::mt19937_64& rng, bool with_grad) {
  int c = static_cast<int>(episode.references.size());
  if (c != cfg_.classes)
    throw ContractError("episode has " + std::to_string(c) +
                        " references, model expects " +
                        std::to_string(cfg_.classes));
  if (episode.true_index < 0 || episode.true_index >= c)
    throw ContractError("episode true index out of range");
  // duplicate references make the loss target ill-defined
  for (int i = 0; i < c; ++i)
    for (int j = i + 1; j < c; ++j) {
      const auto& a = episode.references[i];
      const auto& b = episode.references[j];
      if (same_shape(a, b) && (a.v == b.v).all())
        throw ContractError("episode references " + std::to_string(i) +
                            " and " + std::to_string(j) + " are identical");
    }

  Tape tape;
  ParamBinding binding(tape, params_);
  std::bernoulli_distribution keep(1.0 - cfg_.comparator.dropout);
  std::vector<Var> scores;
  scores.reserve(c);
  for (int j = 0; j < c; ++j) {
    std::optional<Tensor> mask;
    if (training && cfg_.fusion == Fusion::Dcc &&
        cfg_.comparator.dropout > 0.0) {
      Tensor mt = Tensor::zeros({cfg_.comparator.hidden});
      for (Eigen::Index i = 0; i < mt.v.size(); ++i)
        mt.v[i] = keep(rng) ? 1.0 : 0.0;
      mask = std::move(mt);
    }
    Var e = pair_embedding(tape, binding, episode.unknown,
                           episode.references[j], mask);
    scores.push_back(score(tape, e, binding));
  }
  Var probs = class_probs(tape, scores, binding);
  Var loss = cross_entropy(tape, probs, episode.true_index);

  EpisodeResult out;
  out.loss = tape.value(loss).v[0];
  out.probs = tape.value(probs).v;
  Eigen::Index best = 0;
  out.probs.maxCoeff(&best);
  out.predicted = static_cast<int>(best);
  if (with_grad) {
    tape.backward(loss);
    binding.collect_grads();
  }
  return out;
}

double DccModel::pair_score(const Tensor& img_a, const Tensor& img_b,
                            std::vector<GlimpseParams>* trajectory) {
  Tape tape;
  ParamBinding binding(tape, params_);
  Var e = pair_embedding(tape, binding, img_a, img_b, {}, trajectory);
  Var s = score(tape, e, binding);
  return tape.value(s).v[0];
}

}  // namespace dcc
