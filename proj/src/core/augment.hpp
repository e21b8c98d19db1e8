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
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/common.hpp"
#include "core/data.hpp"
#include "core/model.hpp"
#include "core/style.hpp"

namespace advstyle {

enum class StyleSpace { kRGB, kLAB };
enum class StyleGranularity { kWhole, kPatches2x2 };

/// Floor applied to standard deviations after random or adversarial updates.
inline constexpr double kStdFloor = 1e-4;

struct AdvConfig {
  double gamma = 3.0;       // learning rate of the style ascent
  std::size_t steps = 1;    // one-step ascent by default
  double clamp_std_min = kStdFloor;
  bool clamp_image = false; // clamp the produced image to [0,1] (export only)
  StyleSpace space = StyleSpace::kRGB;
  StyleGranularity granularity = StyleGranularity::kWhole;

  void validate() const;
};

/// Which strategy produced a sample and what its style numbers were. For the
/// patch variant the vectors concatenate the cells row-major.
struct AugProvenance {
  std::string strategy;
  std::vector<float> mu_before, sd_before, mu_after, sd_after;
};

/// Count of sample-level augmentation invocations in this process; lets tests
/// assert that evaluation paths never augment.
std::uint64_t augmentation_invocation_count();

/// Scalar loss of a styled image; the step ascends this loss.
template <typename T>
using StyledLossFn = std::function<Tensor<T>(Tape<T>&, const Tensor<T>& xhat)>;

/// One gradient-ascent step on the style statistics of a normalized image:
/// evaluates loss_fn on xhat = xbar * sigma + mu, then moves
/// (mu, sigma) += gamma * d loss / d (mu, sigma), raw gradient, and floors
/// sigma at clamp_std_min. xbar enters as a constant.
template <typename T>
StyleStats<T> adv_style_step_with_loss(const StyledLossFn<T>& loss_fn, const Tensor<T>& xbar,
                                       const StyleStats<T>& stats, double gamma,
                                       double clamp_std_min = kStdFloor) {
  if (gamma < 0) throw std::invalid_argument("adv_style_step: gamma must be >= 0");
  Tensor<T> mu = stats.mean.clone();
  Tensor<T> sigma = stats.std.clone();
  mu.set_requires_grad(true);
  sigma.set_requires_grad(true);
  Tape<T> tape;
  Tensor<T> xhat = tape.channel_affine(xbar.detached(), sigma, mu);
  tape.backward(loss_fn(tape, xhat));
  StyleStats<T> out{Tensor<T>(mu.shape()), Tensor<T>(sigma.shape())};
  for (std::size_t c = 0; c < mu.size(); ++c) {
    out.mean[c] = mu[c] + static_cast<T>(gamma) * mu.grad()[c];
    T s = sigma[c] + static_cast<T>(gamma) * sigma.grad()[c];
    if (s < static_cast<T>(clamp_std_min)) s = static_cast<T>(clamp_std_min);
    out.std[c] = s;
  }
  return out;
}

/// The model-loss instantiation of the step: loss is the pixel-wise
/// cross-entropy of the frozen model on the styled image.
StyleStats<float> adv_style_step(const ModelState<float>& model, const Tensor<float>& xbar,
                                 const StyleStats<float>& stats, const IntTensor& label,
                                 double gamma, double clamp_std_min = kStdFloor,
                                 int ignore_index = -1);

/// Full adversarial style augmentation of one sample: decompose, run the
/// configured ascent, recompose. The label of the result is the same object
/// as the input's.
LabeledImage adv_style_augment(const ModelState<float>& model, const LabeledImage& sample,
                               const AdvConfig& cfg, AugProvenance* prov = nullptr,
                               int ignore_index = -1);

/// Gaussian noise on the style feature: mu += N(0, noise_std^2),
/// sigma += N(0, noise_std^2) per channel, sigma floored.
LabeledImage rand_style(const LabeledImage& sample, double noise_std, std::uint64_t seed,
                        AugProvenance* prov = nullptr);

/// a's content recomposed with lambda * stats(a) + (1 - lambda) * stats(b).
LabeledImage mix_style(const LabeledImage& a, const LabeledImage& b, double lambda,
                       AugProvenance* prov = nullptr);

/// Swaps the styles of two samples.
std::pair<LabeledImage, LabeledImage> cross_style(const LabeledImage& a, const LabeledImage& b,
                                                  AugProvenance* prov_a = nullptr,
                                                  AugProvenance* prov_b = nullptr);

/// Raw-gradient ascent in pixel space: x += lr * d loss / d x, `steps` times
/// against the frozen model.
LabeledImage adv_pixel(const ModelState<float>& model, const LabeledImage& sample, double lr,
                       std::size_t steps, AugProvenance* prov = nullptr, int ignore_index = -1);

/// Seeded categorical draw over strategies; weights must sum to 1.
std::size_t policy_select(std::size_t num_strategies, std::span<const double> weights, Rng& rng);

}  // namespace advstyle
