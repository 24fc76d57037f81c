#include "dcc/params.hpp"

#include <cmath>

#include "dcc/errors.hpp"

namespace dcc {

Tensor xavier_init(const std::vector<int>& shape, std::mt19937_64& rng) {
  if (shape.empty() || shape.size() > 2)
    throw ShapeError("xavier_init: expected 1- or 2-D shape, got " +
                     Tensor::shape_str(shape));
  int fan_in = shape.size() == 2 ? shape[1] : shape[0];
  int fan_out = shape[0];
  double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t = Tensor::zeros(shape);
  for (Eigen::Index i = 0; i < t.v.size(); ++i) t.v[i] = dist(rng);
  return t;
}

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (values_.count(name)) throw ContractError("duplicate parameter: " + name);
  names_.push_back(name);
  grads_[name] = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(t.size()));
  return values_[name] = std::move(t);
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

Eigen::ArrayXd& ParamStore::grad(const std::string& name) {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, g] : grads_) g.setZero();
}

Var ParamBinding::operator[](const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  Var v = tape_.leaf(store_.at(name));
  index_[name] = v;
  bound_.emplace_back(name, v);
  return v;
}

void ParamBinding::collect_grads() {
  for (const auto& [name, v] : bound_) store_.grad(name) += tape_.grad(v);
}

}  // namespace dcc
