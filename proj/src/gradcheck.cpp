#include "dcc/gradcheck.hpp"

#include <cmath>

namespace dcc {

FdReport fd_check(const std::function<double(const std::vector<Tensor>&)>& f,
                  std::vector<Tensor> point,
                  const std::vector<Eigen::ArrayXd>& analytic, double eps,
                  double floor) {
  if (analytic.size() != point.size())
    throw ContractError("fd_check: analytic gradient count mismatch");
  FdReport rep;
  for (std::size_t p = 0; p < point.size(); ++p) {
    if (analytic[p].size() != static_cast<Eigen::Index>(point[p].size()))
      throw ShapeError("fd_check: gradient shape mismatch for parameter " +
                       std::to_string(p));
    for (Eigen::Index i = 0; i < point[p].v.size(); ++i) {
      double saved = point[p].v[i];
      point[p].v[i] = saved + eps;
      double fp = f(point);
      point[p].v[i] = saved - eps;
      double fm = f(point);
      point[p].v[i] = saved;
      double fd = (fp - fm) / (2.0 * eps);
      double an = analytic[p][i];
      double denom = std::max({std::abs(fd), std::abs(an), floor});
      rep.max_rel_error = std::max(rep.max_rel_error, std::abs(fd - an) / denom);
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace dcc
