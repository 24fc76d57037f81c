#include "dcc/encoder.hpp"

#include <fstream>

#include "dcc/errors.hpp"

namespace dcc {

void EncoderConfig::derive_output() {
  if (mode == FileLoad) return;
  int side = input_side;
  int ch = 3;
  for (const auto& st : stages) {
    if (st.kind == StemStage::Conv) {
      if (st.stride != 1 && st.stride != 2)
        throw ShapeError("stem conv stride must be 1 or 2");
      // 3x3, pad 1: side -> ceil(side/stride)
      side = (side + 2 - 3) / st.stride + 1;
      ch = st.out_channels;
    } else {
      if (side % 2)
        throw ShapeError("stem pool needs even side, got " +
                         std::to_string(side));
      side /= 2;
    }
  }
  out_channels = ch;
  out_side = side;
}

void init_stem_params(const EncoderConfig& cfg, ParamStore& store,
                      std::mt19937_64& rng) {
  int ch = 3;
  int conv_idx = 0;
  for (const auto& st : cfg.stages) {
    if (st.kind != StemStage::Conv) continue;
    std::string base = "stem.conv" + std::to_string(conv_idx++);
    store.add(base + ".w", xavier_init({st.out_channels, ch * 9}, rng));
    store.add(base + ".b", Tensor::zeros({st.out_channels}));
    ch = st.out_channels;
  }
}

FeatureVar encode(Tape& tape, const Tensor& image, const EncoderConfig& cfg,
                  ParamBinding& params) {
  if (cfg.mode != EncoderConfig::TinyStem)
    throw ContractError("encode: config is not in tiny-stem mode");
  if (image.rank() != 3 || image.shape[0] != 3 ||
      image.shape[1] != cfg.input_side || image.shape[2] != cfg.input_side)
    throw ShapeError("encode: expected 3x" + std::to_string(cfg.input_side) +
                     "x" + std::to_string(cfg.input_side) + " image, got " +
                     Tensor::shape_str(image.shape));
  if (image.v.minCoeff() < 0.0 || image.v.maxCoeff() > 1.0)
    throw ContractError("encode: image values outside [0,1]");

  Var x = tape.constant(image);
  int side = cfg.input_side;
  int ch = 3;
  int conv_idx = 0;
  for (const auto& st : cfg.stages) {
    if (st.kind == StemStage::Conv) {
      std::string base = "stem.conv" + std::to_string(conv_idx++);
      Var cols = unfold(tape, x, 3, st.stride, 1);  // (ch*9) x (side'^2)
      int out_side = (side + 2 - 3) / st.stride + 1;
      Var pre = matmul(tape, params[base + ".w"], cols);
      // bias broadcast over spatial cells
      Var bias_col = reshape(tape, params[base + ".b"], {st.out_channels, 1});
      Var ones = tape.constant(
          Tensor({1, out_side * out_side},
                 Eigen::ArrayXd::Ones(static_cast<Eigen::Index>(out_side) *
                                      out_side)));
      Var act = tanh_op(tape, add(tape, pre, matmul(tape, bias_col, ones)));
      x = reshape(tape, act, {st.out_channels, out_side, out_side});
      side = out_side;
      ch = st.out_channels;
    } else {
      x = avgpool2(tape, x);
      side /= 2;
    }
  }
  FeatureVar out;
  out.channels = ch;
  out.side = side;
  out.var = reshape(tape, x, {ch, side * side});
  return out;
}

void save_feature_file(const std::string& path, const Tensor& fmap) {
  if (fmap.rank() != 3 || fmap.shape[1] != fmap.shape[2])
    throw ShapeError("feature file expects C x M x M, got " +
                     Tensor::shape_str(fmap.shape));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for write: " + path);
  out << "DCCFEAT v1 " << fmap.shape[0] << " " << fmap.shape[1] << " "
      << fmap.shape[2] << "\n";
  out.write(reinterpret_cast<const char*>(fmap.v.data()),
            static_cast<std::streamsize>(fmap.v.size() * sizeof(double)));
  if (!out) throw FormatError("short write: " + path);
}

Tensor load_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path);
  std::string magic, version;
  int c = 0, m1 = 0, m2 = 0;
  in >> magic >> version >> c >> m1 >> m2;
  if (magic != "DCCFEAT" || version != "v1" || c <= 0 || m1 <= 0 || m1 != m2)
    throw FormatError("bad feature manifest in " + path);
  in.get();  // newline
  Tensor t = Tensor::zeros({c, m1, m2});
  in.read(reinterpret_cast<char*>(t.v.data()),
          static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  auto got = in.gcount();
  if (got != static_cast<std::streamsize>(t.v.size() * sizeof(double)))
    throw FormatError("truncated feature payload in " + path + ": got " +
                      std::to_string(got) + " of " +
                      std::to_string(t.v.size() * sizeof(double)) + " bytes");
  return t;
}

}  // namespace dcc
