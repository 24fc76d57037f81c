#pragma once

#include <string>
#include <vector>

#include "dcc/gradcheck.hpp"

namespace dcc {

struct BlockReport {
  std::string name;
  double max_rel_error = 0;
  double tolerance = 0;
  bool pass = false;
};

// Finite-difference verification of every differentiable block: tensor-core
// ops, co-attention, glimpse read, comparator, similarity head, and the
// end-to-end tiny model. `only` restricts to blocks whose name contains it;
// `corrupt` perturbs one analytic gradient as a negative control.
std::vector<BlockReport> run_gradient_suite(double eps = 1e-5,
                                            const std::string& only = "",
                                            bool corrupt = false);

bool all_pass(const std::vector<BlockReport>& reports);

}  // namespace dcc
