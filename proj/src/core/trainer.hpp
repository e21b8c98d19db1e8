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

#include <cstdint>
#include <string>
#include <vector>

#include "core/augment.hpp"
#include "core/data.hpp"
#include "core/model.hpp"

namespace advstyle {

enum class Policy {
  kNone,
  kAdvStyle,
  kAdvPixel,
  kRandStyle,
  kMixStyle,
  kCrossStyle,
  kRandomAdvCombo,
};

const char* policy_name(Policy p);
Policy parse_policy(const std::string& name);

/// Standard photometric/geometric augmentations applied to the clean sample
/// before any style strategy. All default off.
struct PreAugConfig {
  bool color_jitter = false;   // brightness/contrast factors in [0.6, 1.4]
  bool gaussian_blur = false;  // kernel 3 or 5, sigma in [0.1, 1.0]
  bool random_flip = false;    // horizontal, p = 0.5
  std::size_t crop = 0;        // random crop edge, 0 = off

  bool any() const { return color_jitter || gaussian_blur || random_flip || crop > 0; }
};

LabeledImage pre_augment(const LabeledImage& sample, const PreAugConfig& cfg, Rng& rng);

struct TrainConfig {
  std::size_t max_iter = 2000;
  std::size_t batch_size = 8;
  double lr0 = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double poly_power = 0.9;
  Policy policy = Policy::kAdvStyle;
  AdvConfig adv;
  double rand_noise_std = 0.1;
  double mix_lambda = -1.0;  // < 0: draw from Beta(0.1, 0.1) per call
  double pixel_lr = 10.0;
  std::size_t pixel_steps = 1;
  std::uint64_t seed = 1;
  int ignore_index = -1;
  std::size_t checkpoint_every = 0;  // 0: max_iter / 10
  PreAugConfig preaug;
  ModelConfig model;
  /// Keep up to this many augmented samples, spread over the run, for
  /// dataset-level style analysis. 0 disables harvesting.
  std::size_t collect_augmented_max = 0;

  void validate() const;
};

/// lr0 * (1 - iter/max_iter)^power.
double poly_lr(std::size_t iter, double lr0, double power, std::size_t max_iter);

/// v <- momentum * v + (grad + weight_decay * theta); theta <- theta - lr * v.
/// Weight decay applies to conv weights only, not biases. Throws on a
/// non-finite parameter after the update. Gradients are left in place.
void sgd_step(ModelState<float>& model, double lr, double momentum, double weight_decay);

struct TrainRecord {
  std::size_t iter;
  double lr;
  double loss_clean;
  double loss_adv;
  double mu_shift_l2;
  double sigma_shift_l2;
};

struct TrainLog {
  std::vector<TrainRecord> records;
};

/// Header: iter,lr,loss_clean,loss_adv,mu_shift_l2,sigma_shift_l2.
void write_train_log_csv(const std::string& path, const TrainLog& log);

struct TrainResult {
  ModelState<float> model;
  TrainLog log;
  std::vector<LabeledImage> augmented;  // harvested x+ samples, if requested
};

/// Two-stage training loop: per iteration, style statistics are learned
/// adversarially against the frozen parameters, then the parameters take one
/// SGD step on the summed loss of the clean and augmented batches. Policy
/// kNone trains on the clean loss alone. When out_dir is non-empty the loop
/// writes periodic checkpoints plus checkpoint_final; on a non-finite loss it
/// saves the last good parameters and aborts.
TrainResult train(const TrainConfig& cfg, const Dataset& source, const std::string& out_dir = "");

}  // namespace advstyle
