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

#include "core/data.hpp"
#include "core/trainer.hpp"

namespace advstyle {

struct BenchTaskSpec {
  std::string name;
  Policy policy = Policy::kNone;
  double gamma = -1.0;  // >= 0 overrides adv.gamma for this task
};

struct BenchRunResult {
  std::string name;
  std::size_t repeat = 0;
  std::uint64_t run_seed = 0;
  double source_miou = 0.0;
  double target_miou = 0.0;
};

/// Shared two-domain evaluation protocol: per repeat, one source training set
/// and disjoint source/target evaluation sets; model init and batch order are
/// paired across tasks within a repeat.
struct BenchProtocol {
  TrainConfig base;  // policy (and optionally gamma) overridden per task
  DomainSpec source;
  DomainSpec target;
  std::size_t num_train = 192;
  std::size_t num_eval = 48;
  std::size_t repeats = 3;
  std::uint64_t seed = 1;
  std::string out_dir;  // when set, per-run checkpoints and logs land here
};

/// The comparison set of the benchmark command, in output order.
std::vector<BenchTaskSpec> default_bench_tasks();

/// Runs every (task, repeat) job. Jobs are independent and deterministic, so
/// they execute on a small worker pool (kernel-internal threading is disabled
/// meanwhile); results are identical regardless of scheduling.
std::vector<BenchRunResult> run_bench_tasks(const BenchProtocol& protocol,
                                            const std::vector<BenchTaskSpec>& tasks);

struct BenchAggregate {
  std::string name;
  double source_miou = 0.0;
  double target_miou = 0.0;
  double mean_miou = 0.0;
};

std::vector<BenchAggregate> aggregate_bench(const std::vector<BenchTaskSpec>& tasks,
                                            const std::vector<BenchRunResult>& runs);

}  // namespace advstyle
