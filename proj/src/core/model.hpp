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

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace advstyle {

/// Fully convolutional stack: conv3x3+relu stages at stride 1 with same
/// padding, then a 1x1 classifier head, so the logits keep the input
/// resolution. injection_position selects where a style hook applies:
/// 0 = the input image (handled by the caller), p in 1..stages = output of
/// stage p.
struct ModelConfig {
  std::size_t in_channels = 3;
  std::size_t num_classes = 4;
  std::vector<std::size_t> widths = {16, 32, 32, 16};
  std::size_t kernel = 3;
  std::size_t injection_position = 0;

  std::size_t stages() const { return widths.size(); }

  void validate() const {
    if (widths.empty()) throw std::invalid_argument("model: widths must be non-empty");
    if (num_classes < 1) throw std::invalid_argument("model: num_classes must be >= 1");
    if (kernel % 2 == 0) throw std::invalid_argument("model: kernel must be odd");
    if (injection_position > widths.size())
      throw std::invalid_argument("model: injection_position " +
                                  std::to_string(injection_position) + " exceeds " +
                                  std::to_string(widths.size()) + " stages");
  }
};

template <typename T>
struct ConvParams {
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
struct ModelState {
  ModelConfig config;
  std::vector<ConvParams<T>> stages;
  ConvParams<T> head;
  std::vector<Tensor<T>> momentum;  // aligned with parameters()

  /// Handles onto the live parameter tensors, weights before biases per
  /// layer, head last.
  std::vector<Tensor<T>> parameters() const {
    std::vector<Tensor<T>> out;
    for (const auto& s : stages) {
      out.push_back(s.weight);
      out.push_back(s.bias);
    }
    out.push_back(head.weight);
    out.push_back(head.bias);
    return out;
  }

  void zero_param_grads() {
    for (auto& p : parameters()) p.clear_grad();
  }
};

template <typename T>
ModelState<T> build_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelState<T> state;
  state.config = config;
  Rng rng(mix_seed(seed, 0x6d6f64656cull));  // "model"
  std::size_t cin = config.in_channels;
  auto init_conv = [&](std::size_t cout, std::size_t cin_l, std::size_t k) {
    ConvParams<T> p;
    p.weight = Tensor<T>({cout, cin_l, k, k});
    const double stddev = std::sqrt(2.0 / static_cast<double>(cin_l * k * k));
    for (std::size_t i = 0; i < p.weight.size(); ++i)
      p.weight[i] = static_cast<T>(rng.normal(0.0, stddev));
    p.weight.set_requires_grad(true);
    p.bias = Tensor<T>({cout});
    p.bias.set_requires_grad(true);
    return p;
  };
  for (std::size_t w : config.widths) {
    state.stages.push_back(init_conv(w, cin, config.kernel));
    cin = w;
  }
  state.head = init_conv(config.num_classes, cin, 1);
  for (const auto& p : state.parameters()) state.momentum.push_back(Tensor<T>(p.shape()));
  return state;
}

/// Applied to a stage output [N,C,H,W]; must return the same shape.
template <typename T>
using StyleHook = std::function<Tensor<T>(Tape<T>&, const Tensor<T>&)>;

/// Forward pass to per-pixel logits [N,K,H,W]. With frozen = true the
/// parameters enter the graph as constants, so backward reaches the inputs
/// but never touches parameter gradients.
template <typename T>
Tensor<T> model_forward(Tape<T>& tape, const ModelState<T>& state, const Tensor<T>& images,
                        bool frozen = false, const StyleHook<T>* hook = nullptr) {
  if (images.rank() != 4 || images.dim(1) != state.config.in_channels)
    throw std::invalid_argument("model: channel mismatch, expected [N," +
                                std::to_string(state.config.in_channels) + ",H,W], got " +
                                shape_str(images.shape()));
  const std::size_t pad = state.config.kernel / 2;
  Tensor<T> h = images;
  for (std::size_t i = 0; i < state.stages.size(); ++i) {
    const auto& layer = state.stages[i];
    const Tensor<T> w = frozen ? layer.weight.detached() : layer.weight;
    const Tensor<T> b = frozen ? layer.bias.detached() : layer.bias;
    h = tape.relu(tape.conv2d(h, w, b, 1, pad));
    if (hook && state.config.injection_position == i + 1) h = (*hook)(tape, h);
  }
  const Tensor<T> hw = frozen ? state.head.weight.detached() : state.head.weight;
  const Tensor<T> hb = frozen ? state.head.bias.detached() : state.head.bias;
  return tape.conv2d(h, hw, hb, 1, 0);
}

/// Pixel-wise cross-entropy between logits and labels.
template <typename T>
Tensor<T> seg_loss(Tape<T>& tape, const Tensor<T>& logits, const IntTensor& labels,
                   int ignore_index = -1) {
  return tape.pixelwise_cross_entropy(logits, labels, ignore_index);
}

}  // namespace advstyle
