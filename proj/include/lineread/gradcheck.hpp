// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lineread/tensor.hpp"

namespace lineread {

struct GradCheckReport {
  double max_rel_err = 0.0;
  size_t elements = 0;
  std::string worst;  // "leaf[index]: analytic vs numeric" of the worst element

  bool passed(double tol) const { return max_rel_err < tol; }
};

// Central finite differences against the recorded backward pass, at 64-bit.
// `build` re-runs the forward pass against the current leaf values and
// returns the scalar loss. Relative error uses a floor so that near-zero
// gradients are compared absolutely.
GradCheckReport finite_diff_check(
    const std::vector<std::pair<std::string, Tensor<double>>>& leaves,
    const std::function<Tensor<double>()>& build, double step = 1e-6,
    double rel_floor = 1e-3);

// Randomized gradient checks over every differentiable op, `trials` trials.
// Returns one line per failure; empty means the suite passed.
std::vector<std::string> run_op_gradcheck_suite(int trials, uint64_t seed, double tol);

}  // namespace lineread
