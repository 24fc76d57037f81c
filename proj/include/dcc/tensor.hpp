#pragma once

#include <Eigen/Core>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dcc/errors.hpp"

namespace dcc {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense double tensor, row-major. Rank is the length of `shape`; scalars have
// shape {1} by convention (see Tensor::scalar).
struct Tensor {
  std::vector<int> shape;
  Eigen::ArrayXd v;

  Tensor() = default;
  Tensor(std::vector<int> s, Eigen::ArrayXd data)
      : shape(std::move(s)), v(std::move(data)) {
    if (static_cast<Eigen::Index>(count(shape)) != v.size())
      throw ShapeError("tensor value count " + std::to_string(v.size()) +
                       " does not match shape " + shape_str(shape));
  }

  Tensor(std::vector<int> s, std::initializer_list<double> xs)
      : shape(std::move(s)), v(static_cast<Eigen::Index>(xs.size())) {
    if (count(shape) != xs.size())
      throw ShapeError("tensor value count " + std::to_string(xs.size()) +
                       " does not match shape " + shape_str(shape));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
  }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int e : s) {
      if (e <= 0) throw ShapeError("nonpositive extent in shape " + shape_str(s));
      n *= static_cast<std::size_t>(e);
    }
    return n;
  }

  static Tensor zeros(std::vector<int> s) {
    auto n = count(s);
    return Tensor(std::move(s), Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n)));
  }

  static Tensor scalar(double x) {
    Eigen::ArrayXd d(1);
    d[0] = x;
    return Tensor({1}, std::move(d));
  }

  static Tensor vec(std::initializer_list<double> xs) {
    Eigen::ArrayXd d(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) d[i++] = x;
    return Tensor({static_cast<int>(xs.size())}, std::move(d));
  }

  static Tensor from_matrix(const RowMat& m) {
    Eigen::ArrayXd d(m.size());
    Eigen::Map<RowMat>(d.data(), m.rows(), m.cols()) = m;
    return Tensor({static_cast<int>(m.rows()), static_cast<int>(m.cols())},
                  std::move(d));
  }

  std::size_t size() const { return static_cast<std::size_t>(v.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  bool is_scalar() const { return v.size() == 1; }

  int rows() const {
    require_rank2("rows");
    return shape[0];
  }
  int cols() const {
    require_rank2("cols");
    return shape[1];
  }

  Eigen::Map<const RowMat> mat() const {
    require_rank2("mat");
    return {v.data(), shape[0], shape[1]};
  }
  Eigen::Map<RowMat> mat() {
    require_rank2("mat");
    return {v.data(), shape[0], shape[1]};
  }

  double operator()(int i) const { return v[i]; }
  double& operator()(int i) { return v[i]; }

  bool finite() const { return v.isFinite().all(); }

  static std::string shape_str(const std::vector<int>& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
  }

 private:
  void require_rank2(const char* what) const {
    if (shape.size() != 2)
      throw ShapeError(std::string(what) + " requires rank-2 tensor, got " +
                       shape_str(shape));
  }
};

inline bool same_shape(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape;
}

}  // namespace dcc
