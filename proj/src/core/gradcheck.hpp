/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 advstyle contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace advstyle {

/// Builds a scalar loss from the given inputs on the given tape.
using GraphFn = std::function<Tensor<double>(Tape<double>&, std::vector<Tensor<double>>&)>;

struct GradCheckResult {
  std::vector<double> max_rel_err_per_input;
  double max_rel_err = 0.0;
};

/// Central finite differences vs the tape's analytic gradients, in 64-bit.
/// Per element the error is |a - n| / max(1, |a|, |n|), so near-zero
/// gradients are compared absolutely. fault_offset, when nonzero, is added to
/// one analytic gradient entry before comparison (test fixture for verifying
/// that a wrong adjoint is detected).
GradCheckResult grad_check(const GraphFn& fn, std::vector<Tensor<double>> inputs, double eps,
                           double fault_offset = 0.0);

struct OpCheck {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct GradCheckSuiteResult {
  std::vector<OpCheck> checks;
  double eps = 1e-5;
  double tol = 1e-4;
  bool all_pass = false;
};

/// Runs one finite-difference check per differentiable op, plus the composed
/// pipelines (conv->relu->cross-entropy and the full style-augmented
/// forward). inject_fault corrupts one adjoint comparison so the failure path
/// is exercisable.
GradCheckSuiteResult run_gradcheck_suite(bool inject_fault = false);

/// One line per op: "name  max_rel_err  ok|FAIL", then a summary line.
std::string format_gradcheck_report(const GradCheckSuiteResult& result);

}  // namespace advstyle
