#pragma once

#include <functional>
#include <vector>

#include "dcc/tensor.hpp"

namespace dcc {

// Central finite differences against analytic gradients. The scalar function
// f rebuilds its forward pass from the given parameter point, so the check is
// independent of any backward implementation.
struct FdReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// rel = |fd - an| / max(|fd|, |an|, floor); floor keeps FD roundoff noise on
// near-zero gradients from registering as error.
FdReport fd_check(const std::function<double(const std::vector<Tensor>&)>& f,
                  std::vector<Tensor> point,
                  const std::vector<Eigen::ArrayXd>& analytic,
                  double eps = 1e-5, double floor = 1e-4);

}  // namespace dcc
