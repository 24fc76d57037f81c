#pragma once

#include <string>
#include <vector>

#include "dcc/image.hpp"
#include "dcc/params.hpp"
#include "dcc/tape.hpp"

namespace dcc {

// Convolutional activations of one image on the tape: a C x M^2 matrix whose
// columns follow the project flatten order (spatial row major).
struct FeatureVar {
  int channels = 0;
  int side = 0;  // M
  Var var;
};

struct StemStage {
  enum Kind { Conv, Pool } kind = Conv;
  int out_channels = 0;  // Conv only
  int stride = 1;        // Conv only; Pool always halves
};

struct EncoderConfig {
  enum Mode { TinyStem, FileLoad } mode = TinyStem;
  int input_side = 56;
  std::vector<StemStage> stages = {
      {StemStage::Conv, 16, 2},
      {StemStage::Pool, 0, 1},
      {StemStage::Conv, 32, 2},
  };
  // FileLoad declares these directly; TinyStem derives them.
  int out_channels = 32;
  int out_side = 7;

  // Walks the stage schedule; throws ShapeError if a stage does not divide.
  void derive_output();
};

// Registers stem.convN.{w,b} parameters for the config.
void init_stem_params(const EncoderConfig& cfg, ParamStore& store,
                      std::mt19937_64& rng);

// Tiny-stem forward: 3x3 convolutions as unfold+matmul, tanh nonlinearity,
// 2x2 average pools. image values must lie in [0,1].
FeatureVar encode(Tape& tape, const Tensor& image, const EncoderConfig& cfg,
                  ParamBinding& params);

// Feature file: text line "DCCFEAT v1 C M M" + C*M*M little-endian doubles.
void save_feature_file(const std::string& path, const Tensor& fmap /*CxMxM*/);
Tensor load_feature_file(const std::string& path);  // C x M x M

}  // namespace dcc
