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

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advstyle/advstyle.h"

namespace {

struct OptionsDeleter {
  void operator()(advstyle_options* o) const { advstyle_options_destroy(o); }
};
using OptionsPtr = std::unique_ptr<advstyle_options, OptionsDeleter>;

/// Convenience aliases for frequently overridden keys.
const char* resolve_alias(const std::string& key) {
  if (key == "checkpoint") return "augment.checkpoint";
  if (key == "gamma") return "adv.gamma";
  if (key == "noise_std") return "rand.noise_std";
  if (key == "lambda") return "mix.lambda";
  if (key == "bins") return "analyze.bins";
  if (key == "smoothing") return "analyze.smoothing";
  if (key == "repeats") return "bench.repeats";
  return key.c_str();
}

int fail(advstyle_status st) {
  std::fprintf(stderr, "error: %s\n", advstyle_last_error());
  return static_cast<int>(st);
}

/// Leftover tokens are treated as --key value overrides against the option
/// registry, so any config key works as a flag.
int apply_overrides(advstyle_options* opts, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() <= 2) {
      std::fprintf(stderr, "error: expected --key value, got '%s'\n", tok.c_str());
      return 2;
    }
    std::string key = tok.substr(2);
    std::string value;
    const std::size_t eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) {
        std::fprintf(stderr, "error: missing value for --%s\n", key.c_str());
        return 2;
      }
      value = extras[++i];
    }
    const advstyle_status st = advstyle_options_set(opts, resolve_alias(key), value.c_str());
    if (st != ADVSTYLE_OK) return fail(st);
  }
  return 0;
}

int load_config(advstyle_options* opts, const std::string& path) {
  if (path.empty()) return 0;
  const advstyle_status st = advstyle_options_load_file(opts, path.c_str());
  return st == ADVSTYLE_OK ? 0 : fail(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"advstyle: adversarial style augmentation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string domain;
  std::string strategy;
  std::string input_dir;
  std::vector<std::string> analyze_dirs;
  bool inject_fault = false;

  auto* train = app.add_subcommand("train", "train on the synthetic source domain");
  train->add_option("--config", config_path, "config file (key = value lines)");
  train->add_option("--out", out_dir, "output directory")->required();
  train->allow_extras();

  auto* bench = app.add_subcommand(
      "bench", "train every policy and compare source/target mIoU");
  bench->add_option("--config", config_path, "config file");
  bench->add_option("--out", out_dir, "output directory")->required();
  bench->allow_extras();

  auto* generate = app.add_subcommand("generate", "write a synthetic domain to disk");
  generate->add_option("domain", domain, "source or target")->required();
  generate->add_option("out", out_dir, "output directory")->required();
  generate->add_option("--config", config_path, "config file");
  generate->allow_extras();

  auto* augment = app.add_subcommand("augment", "augment a dataset directory offline");
  augment->add_option("strategy", strategy,
                      "advstyle | advpixel | randstyle | mixstyle | crossstyle")
      ->required();
  augment->add_option("input", input_dir, "input dataset directory")->required();
  augment->add_option("out", out_dir, "output directory")->required();
  augment->add_option("--config", config_path, "config file");
  augment->allow_extras();

  auto* analyze = app.add_subcommand("analyze", "style tables, histograms, pairwise KL");
  analyze->add_option("dirs", analyze_dirs, "dataset directories")->required();
  analyze->add_option("--out", out_dir, "output directory")->required();
  analyze->add_option("--config", config_path, "config file");
  analyze->allow_extras();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every op");
  gradcheck->add_flag("--inject-fault", inject_fault,
                      "corrupt one adjoint to exercise the failure path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (gradcheck->parsed()) {
    std::vector<char> report(16384);
    const advstyle_status st =
        advstyle_gradcheck(inject_fault ? 1 : 0, report.data(), report.size());
    std::fputs(report.data(), stdout);
    if (st != ADVSTYLE_OK && report[0] == '\0') std::fprintf(stderr, "error: %s\n", advstyle_last_error());
    return static_cast<int>(st);
  }

  OptionsPtr opts(bench->parsed() ? advstyle_options_create_bench() : advstyle_options_create());
  if (int rc = load_config(opts.get(), config_path)) return rc;

  CLI::App* active = app.get_subcommands().front();
  if (int rc = apply_overrides(opts.get(), active->remaining())) return rc;

  advstyle_status st = ADVSTYLE_OK;
  if (train->parsed()) {
    st = advstyle_train(opts.get(), out_dir.c_str());
  } else if (bench->parsed()) {
    st = advstyle_bench(opts.get(), out_dir.c_str());
  } else if (generate->parsed()) {
    st = advstyle_generate(opts.get(), domain.c_str(), out_dir.c_str());
  } else if (augment->parsed()) {
    st = advstyle_augment(opts.get(), strategy.c_str(), input_dir.c_str(), out_dir.c_str());
  } else if (analyze->parsed()) {
    std::vector<const char*> dirs;
    for (const auto& d : analyze_dirs) dirs.push_back(d.c_str());
    st = advstyle_analyze(opts.get(), dirs.data(), dirs.size(), out_dir.c_str());
  }
  if (st != ADVSTYLE_OK) return fail(st);
  return 0;
}
