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

#include "core/bench.hpp"

#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

namespace advstyle {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461ull;  // "data"
constexpr std::uint64_t kRunStream = 0x72756e73ull;   // "runs"

}  // namespace

std::vector<BenchTaskSpec> default_bench_tasks() {
  return {
      {"none", Policy::kNone},
      {"randstyle", Policy::kRandStyle},
      {"mixstyle", Policy::kMixStyle},
      {"crossstyle", Policy::kCrossStyle},
      {"advpixel", Policy::kAdvPixel},
      {"advstyle", Policy::kAdvStyle},
      {"random_combo", Policy::kRandomAdvCombo},
  };
}

std::vector<BenchRunResult> run_bench_tasks(const BenchProtocol& protocol,
                                            const std::vector<BenchTaskSpec>& tasks) {
  if (tasks.empty()) throw std::invalid_argument("bench: no tasks");
  if (protocol.repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");

  std::vector<Dataset> train_sets(protocol.repeats), source_evals(protocol.repeats),
      target_evals(protocol.repeats);
  for (std::size_t r = 0; r < protocol.repeats; ++r) {
    train_sets[r] = make_domain(protocol.source, protocol.num_train,
                                mix_seed(protocol.seed, kDataStream, 3 * r));
    source_evals[r] = make_domain(protocol.source, protocol.num_eval,
                                  mix_seed(protocol.seed, kDataStream, 3 * r + 1));
    target_evals[r] = make_domain(protocol.target, protocol.num_eval,
                                  mix_seed(protocol.seed, kDataStream, 3 * r + 2));
  }

  struct Job {
    std::size_t task;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < tasks.size(); ++t)
    for (std::size_t r = 0; r < protocol.repeats; ++r) jobs.push_back({t, r});

  std::vector<BenchRunResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());

  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    const BenchTaskSpec& spec = tasks[job.task];
    TrainConfig cfg = protocol.base;
    cfg.policy = spec.policy;
    if (spec.gamma >= 0) cfg.adv.gamma = spec.gamma;
    cfg.seed = mix_seed(protocol.seed, kRunStream, job.repeat);
    std::string run_dir;
    if (!protocol.out_dir.empty())
      run_dir = protocol.out_dir + "/runs/" + spec.name + "_r" + std::to_string(job.repeat);
    TrainResult trained = train(cfg, train_sets[job.repeat], run_dir);
    BenchRunResult& out = results[j];
    out.name = spec.name;
    out.repeat = job.repeat;
    out.run_seed = cfg.seed;
    out.source_miou = evaluate_miou(trained.model, source_evals[job.repeat]).miou;
    out.target_miou = evaluate_miou(trained.model, target_evals[job.repeat]).miou;
  };

  const std::size_t workers = std::min(max_threads(), jobs.size());
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    // run-level parallelism; per-op kernels stay serial meanwhile
    const std::size_t prev = max_threads();
    set_max_threads(1);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t j = next.fetch_add(1);
          if (j >= jobs.size()) return;
          try {
            run_job(j);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    set_max_threads(prev);
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<BenchAggregate> aggregate_bench(const std::vector<BenchTaskSpec>& tasks,
                                            const std::vector<BenchRunResult>& runs) {
  std::vector<BenchAggregate> out;
  for (const auto& task : tasks) {
    BenchAggregate agg;
    agg.name = task.name;
    std::size_t count = 0;
    for (const auto& r : runs) {
      if (r.name != task.name) continue;
      agg.source_miou += r.source_miou;
      agg.target_miou += r.target_miou;
      ++count;
    }
    if (count > 0) {
      agg.source_miou /= static_cast<double>(count);
      agg.target_miou /= static_cast<double>(count);
      agg.mean_miou = 0.5 * (agg.source_miou + agg.target_miou);
    }
    out.push_back(agg);
  }
  return out;
}

}  // namespace advstyle
