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

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/data.hpp"
#include "core/trainer.hpp"

namespace advstyle {

/// Flat key = value configuration with a fixed key registry. Precedence is
/// defaults < config file < explicit set() calls, which is how the CLI layers
/// them. Unknown keys and malformed values throw std::invalid_argument.
class Options {
 public:
  /// Library defaults (training-oriented).
  Options();

  /// Benchmark-protocol defaults: a smaller model/image so the full
  /// multi-policy sweep fits a desktop time budget.
  static Options bench_defaults();

  void set(const std::string& key, const std::string& value);

  /// `key = value` lines, '#' comments, blank lines ignored.
  void load_file(const std::string& path);

  bool known(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;
  std::array<double, 3> get_triplet(const std::string& key) const;

  TrainConfig train_config() const;
  DomainSpec domain_spec(const std::string& which) const;  // "source" | "target"

  /// Resolved configuration, reloadable as a config file. Written before any
  /// computation starts.
  void write_manifest(const std::string& path, const std::string& tool) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return values_; }

 private:
  std::vector<std::pair<std::string, std::string>> values_;  // registry order
};

}  // namespace advstyle
