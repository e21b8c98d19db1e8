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

#include <string>
#include <vector>

#include "core/config.hpp"

namespace advstyle {

/// Command implementations underlying both the C API and the CLI. Each
/// command writes its run manifest into the output directory before any
/// computation. std::invalid_argument marks usage/config errors; every other
/// exception is a computation failure.

void cmd_train(const Options& opts, const std::string& out_dir);

void cmd_bench(const Options& opts, const std::string& out_dir);

void cmd_generate(const Options& opts, const std::string& which, const std::string& out_dir);

void cmd_augment(const Options& opts, const std::string& strategy, const std::string& input_dir,
                 const std::string& out_dir);

void cmd_analyze(const Options& opts, const std::vector<std::string>& input_dirs,
                 const std::string& out_dir);

struct GradcheckOutcome {
  std::string report;
  bool pass = false;
};

GradcheckOutcome cmd_gradcheck(bool inject_fault);

}  // namespace advstyle
