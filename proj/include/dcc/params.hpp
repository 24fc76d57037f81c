#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "dcc/tape.hpp"
#include "dcc/tensor.hpp"

namespace dcc {

// Uniform on +-sqrt(6/(fan_in+fan_out)) for 1- or 2-D shapes. 2-D shapes are
// read as out x in; 1-D shapes use fan_in = fan_out = extent.
Tensor xavier_init(const std::vector<int>& shape, std::mt19937_64& rng);

// Named trainable tensors with gradient slots, in creation order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  Eigen::ArrayXd& grad(const std::string& name);
  const std::vector<std::string>& names() const { return names_; }
  void zero_grads();

 private:
  std::vector<std::string> names_;
  std::map<std::string, Tensor> values_;
  std::map<std::string, Eigen::ArrayXd> grads_;
};

// Per-forward association of parameter names to tape leaves. Grads collected
// back into the store after Tape::backward.
class ParamBinding {
 public:
  ParamBinding(Tape& tape, ParamStore& store) : tape_(tape), store_(store) {}
  Var operator[](const std::string& name);
  // Accumulate tape leaf gradients into store gradient slots.
  void collect_grads();

 private:
  Tape& tape_;
  ParamStore& store_;
  std::vector<std::pair<std::string, Var>> bound_;
  std::map<std::string, Var> index_;
};

}  // namespace dcc
