#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "dcc/coattention.hpp"
#include "dcc/comparator.hpp"
#include "dcc/encoder.hpp"
#include "dcc/similarity.hpp"

namespace dcc {

enum class Fusion { Dcc, Spp, Gp };

Fusion fusion_from_string(const std::string& s);
std::string fusion_to_string(Fusion f);

struct ModelConfig {
  EncoderConfig encoder;
  ComparatorConfig comparator;
  Fusion fusion = Fusion::Dcc;
  int classes = 10;  // episode classes, fixes the head's class-weight length

  int feat_channels() const { return encoder.out_channels; }
  int feat_side() const { return encoder.out_side; }
  int embed_dim() const;
};

struct EpisodeResult {
  double loss = 0;
  Eigen::ArrayXd probs;
  int predicted = 0;
};

// The whole network: stem, co-attention, comparator (or a pooling baseline),
// similarity head. Owns parameters; forward passes build fresh tapes.
class DccModel {
 public:
  DccModel(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Builds the pair embedding e = h_T (or pooled summaries for baselines) on
  // the caller's tape.
  Var pair_embedding(Tape& tape, ParamBinding& binding, const Tensor& img_a,
                     const Tensor& img_b,
                     const std::optional<Tensor>& dropout_mask = {},
                     std::vector<GlimpseParams>* trajectory = nullptr);

  // Cross-entropy episode loss; accumulates parameter gradients when
  // with_grad is set. rng drives the per-pair dropout masks (training only).
  EpisodeResult episode_loss(const Episode& episode, bool training,
                             std::mt19937_64& rng, bool with_grad = true);

  // Test-time similarity s in (-1,1), no dropout, no class softmax.
  double pair_score(const Tensor& img_a, const Tensor& img_b,
                    std::vector<GlimpseParams>* trajectory = nullptr);

 private:
  ModelConfig cfg_;
  ParamStore params_;
};

}  // namespace dcc
