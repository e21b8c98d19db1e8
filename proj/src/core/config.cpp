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

#include "core/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "core/common.hpp"

namespace advstyle {

namespace {

enum class Kind { kU64, kInt, kSize, kDouble, kBool, kSizeList, kTriplet, kPolicy, kSpace,
                  kGranularity, kPath };

struct OptionDesc {
  const char* key;
  const char* default_value;
  Kind kind;
};

const std::vector<OptionDesc>& registry() {
  static const std::vector<OptionDesc> regs = {
      {"seed", "1", Kind::kU64},
      {"policy", "advstyle", Kind::kPolicy},
      {"max_iter", "2000", Kind::kSize},
      {"batch_size", "8", Kind::kSize},
      {"lr0", "0.01", Kind::kDouble},
      {"momentum", "0.9", Kind::kDouble},
      {"weight_decay", "0.0005", Kind::kDouble},
      {"poly_power", "0.9", Kind::kDouble},
      {"checkpoint_every", "0", Kind::kSize},
      {"ignore_index", "-1", Kind::kInt},
      {"adv.gamma", "3", Kind::kDouble},
      {"adv.steps", "1", Kind::kSize},
      {"adv.clamp_std_min", "0.0001", Kind::kDouble},
      {"adv.clamp_image", "false", Kind::kBool},
      {"adv.space", "rgb", Kind::kSpace},
      {"adv.granularity", "whole", Kind::kGranularity},
      {"rand.noise_std", "0.1", Kind::kDouble},
      {"mix.lambda", "-1", Kind::kDouble},
      {"pixel.lr", "10", Kind::kDouble},
      {"pixel.steps", "1", Kind::kSize},
      {"model.widths", "16,32,32,16", Kind::kSizeList},
      {"model.num_classes", "4", Kind::kSize},
      {"model.kernel", "3", Kind::kSize},
      {"model.injection_position", "0", Kind::kSize},
      {"data.image_size", "64", Kind::kSize},
      {"data.num_train", "256", Kind::kSize},
      {"data.num_eval", "64", Kind::kSize},
      {"data.shapes_min", "2", Kind::kSize},
      {"data.shapes_max", "5", Kind::kSize},
      {"data.source.mean", "0.45,0.40,0.35", Kind::kTriplet},
      {"data.source.std", "0.18,0.18,0.18", Kind::kTriplet},
      {"data.source.jitter_mean", "0.02", Kind::kDouble},
      {"data.source.jitter_std", "0.02", Kind::kDouble},
      {"data.target.mean", "0.25,0.30,0.45", Kind::kTriplet},
      {"data.target.std", "0.28,0.28,0.28", Kind::kTriplet},
      {"data.target.jitter_mean", "0.02", Kind::kDouble},
      {"data.target.jitter_std", "0.02", Kind::kDouble},
      {"preaug.color_jitter", "false", Kind::kBool},
      {"preaug.gaussian_blur", "false", Kind::kBool},
      {"preaug.random_flip", "false", Kind::kBool},
      {"preaug.crop", "0", Kind::kSize},
      {"bench.repeats", "3", Kind::kSize},
      {"analyze.bins", "8", Kind::kSize},
      {"analyze.smoothing", "1e-06", Kind::kDouble},
      {"augment.checkpoint", "", Kind::kPath},
      {"collect.augmented", "0", Kind::kSize},
  };
  return regs;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw std::invalid_argument("option " + key + ": not a number: '" + value + "'");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw std::invalid_argument("option " + key + ": not an integer: '" + value + "'");
  return v;
}

void validate_value(const OptionDesc& desc, const std::string& value) {
  const std::string key = desc.key;
  switch (desc.kind) {
    case Kind::kU64:
    case Kind::kInt:
      parse_int(key, value);
      break;
    case Kind::kSize: {
      if (parse_int(key, value) < 0)
        throw std::invalid_argument("option " + key + ": must be non-negative");
      break;
    }
    case Kind::kDouble:
      parse_double(key, value);
      break;
    case Kind::kBool:
      if (value != "true" && value != "false" && value != "0" && value != "1")
        throw std::invalid_argument("option " + key + ": expected true/false, got '" + value +
                                    "'");
      break;
    case Kind::kSizeList: {
      std::stringstream ss(value);
      std::string item;
      std::size_t count = 0;
      while (std::getline(ss, item, ',')) {
        if (parse_int(key, trim(item)) < 0)
          throw std::invalid_argument("option " + key + ": negative entry");
        ++count;
      }
      if (count == 0) throw std::invalid_argument("option " + key + ": empty list");
      break;
    }
    case Kind::kTriplet: {
      std::stringstream ss(value);
      std::string item;
      std::size_t count = 0;
      while (std::getline(ss, item, ',')) {
        parse_double(key, trim(item));
        ++count;
      }
      if (count != 3)
        throw std::invalid_argument("option " + key + ": expected 3 comma-separated values");
      break;
    }
    case Kind::kPolicy:
      parse_policy(value);
      break;
    case Kind::kSpace:
      if (value != "rgb" && value != "lab")
        throw std::invalid_argument("option " + key + ": expected rgb or lab");
      break;
    case Kind::kGranularity:
      if (value != "whole" && value != "patches")
        throw std::invalid_argument("option " + key + ": expected whole or patches");
      break;
    case Kind::kPath:
      break;
  }
}

}  // namespace

Options::Options() {
  for (const auto& d : registry()) values_.emplace_back(d.key, d.default_value);
}

Options Options::bench_defaults() {
  Options opts;
  opts.set("data.image_size", "24");
  opts.set("batch_size", "4");
  opts.set("model.widths", "8,16,8");
  opts.set("data.num_train", "192");
  opts.set("data.num_eval", "48");
  return opts;
}

void Options::set(const std::string& key, const std::string& value) {
  for (std::size_t i = 0; i < registry().size(); ++i) {
    if (registry()[i].key == key) {
      const std::string v = trim(value);
      validate_value(registry()[i], v);
      values_[i].second = v;
      return;
    }
  }
  throw std::invalid_argument("unknown option: " + key);
}

void Options::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

bool Options::known(const std::string& key) const {
  for (const auto& d : registry())
    if (key == d.key) return true;
  return false;
}

const std::string& Options::get(const std::string& key) const {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i].first == key) return values_[i].second;
  throw std::invalid_argument("unknown option: " + key);
}

double Options::get_double(const std::string& key) const { return parse_double(key, get(key)); }

std::int64_t Options::get_int(const std::string& key) const { return parse_int(key, get(key)); }

std::size_t Options::get_size(const std::string& key) const {
  return static_cast<std::size_t>(parse_int(key, get(key)));
}

std::uint64_t Options::get_u64(const std::string& key) const {
  return static_cast<std::uint64_t>(parse_int(key, get(key)));
}

bool Options::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  return v == "true" || v == "1";
}

std::vector<std::size_t> Options::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<std::size_t>(parse_int(key, trim(item))));
  return out;
}

std::array<double, 3> Options::get_triplet(const std::string& key) const {
  std::array<double, 3> out{};
  std::stringstream ss(get(key));
  std::string item;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!std::getline(ss, item, ','))
      throw std::invalid_argument("option " + key + ": expected 3 values");
    out[i] = parse_double(key, trim(item));
  }
  return out;
}

TrainConfig Options::train_config() const {
  TrainConfig cfg;
  cfg.max_iter = get_size("max_iter");
  cfg.batch_size = get_size("batch_size");
  cfg.lr0 = get_double("lr0");
  cfg.momentum = get_double("momentum");
  cfg.weight_decay = get_double("weight_decay");
  cfg.poly_power = get_double("poly_power");
  cfg.policy = parse_policy(get("policy"));
  cfg.adv.gamma = get_double("adv.gamma");
  cfg.adv.steps = get_size("adv.steps");
  cfg.adv.clamp_std_min = get_double("adv.clamp_std_min");
  cfg.adv.clamp_image = get_bool("adv.clamp_image");
  cfg.adv.space = get("adv.space") == "lab" ? StyleSpace::kLAB : StyleSpace::kRGB;
  cfg.adv.granularity = get("adv.granularity") == "patches" ? StyleGranularity::kPatches2x2
                                                            : StyleGranularity::kWhole;
  cfg.rand_noise_std = get_double("rand.noise_std");
  cfg.mix_lambda = get_double("mix.lambda");
  cfg.pixel_lr = get_double("pixel.lr");
  cfg.pixel_steps = get_size("pixel.steps");
  cfg.seed = get_u64("seed");
  cfg.ignore_index = static_cast<int>(get_int("ignore_index"));
  cfg.checkpoint_every = get_size("checkpoint_every");
  cfg.preaug.color_jitter = get_bool("preaug.color_jitter");
  cfg.preaug.gaussian_blur = get_bool("preaug.gaussian_blur");
  cfg.preaug.random_flip = get_bool("preaug.random_flip");
  cfg.preaug.crop = get_size("preaug.crop");
  cfg.model.in_channels = 3;
  cfg.model.num_classes = get_size("model.num_classes");
  cfg.model.widths = get_size_list("model.widths");
  cfg.model.kernel = get_size("model.kernel");
  cfg.model.injection_position = get_size("model.injection_position");
  cfg.collect_augmented_max = get_size("collect.augmented");
  return cfg;
}

DomainSpec Options::domain_spec(const std::string& which) const {
  if (which != "source" && which != "target")
    throw std::invalid_argument("domain_spec: expected source or target, got '" + which + "'");
  const std::string p = "data." + which + ".";
  DomainSpec spec;
  spec.base_mean = get_triplet(p + "mean");
  spec.base_std = get_triplet(p + "std");
  spec.jitter_mean = get_double(p + "jitter_mean");
  spec.jitter_std = get_double(p + "jitter_std");
  spec.num_classes = get_size("model.num_classes");
  spec.shapes_min = get_size("data.shapes_min");
  spec.shapes_max = get_size("data.shapes_max");
  spec.height = get_size("data.image_size");
  spec.width = get_size("data.image_size");
  return spec;
}

void Options::write_manifest(const std::string& path, const std::string& tool) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write manifest: " + path);
  os << "# advstyle run manifest\n";
  os << "# tool = " << tool << "\n";
  os << "# version = " << kVersionString << "\n";
  for (const auto& [key, value] : values_) os << key << " = " << value << "\n";
  if (!os) throw std::runtime_error("manifest write failed: " + path);
}

}  // namespace advstyle
