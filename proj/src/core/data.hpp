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
#include <vector>

#include "core/model.hpp"
#include "core/tensor.hpp"

namespace advstyle {

/// An image tensor [C,H,W] with values in [0,1] at generation time, paired
/// with a per-pixel class map [H,W]. Copies share storage, so an augmented
/// sample can carry the very same label object as its source.
struct LabeledImage {
  Tensor<float> image;
  IntTensor label;
};

struct Dataset {
  std::vector<LabeledImage> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  const LabeledImage& operator[](std::size_t i) const { return items[i]; }
  LabeledImage& operator[](std::size_t i) { return items[i]; }
  auto begin() const { return items.begin(); }
  auto end() const { return items.end(); }
};

/// Synthetic domain: scene geometry (the content) is drawn from a seed stream
/// that never looks at the style fields, and the style is a per-channel
/// affine (base values plus per-image jitter) applied to a shared grayscale
/// texture. Two specs differing only in style therefore produce identical
/// label maps for the same seed.
struct DomainSpec {
  std::array<double, 3> base_mean{0.45, 0.40, 0.35};
  std::array<double, 3> base_std{0.18, 0.18, 0.18};
  double jitter_mean = 0.02;
  double jitter_std = 0.02;
  std::size_t num_classes = 4;
  std::size_t shapes_min = 2;
  std::size_t shapes_max = 5;
  std::size_t height = 64;
  std::size_t width = 64;

  void validate() const;
};

LabeledImage generate_scene(const DomainSpec& spec, std::uint64_t seed);

/// n scenes with seeds seed .. seed+n-1.
Dataset make_domain(const DomainSpec& spec, std::size_t n, std::uint64_t seed);

struct IoUReport {
  std::size_t num_classes = 0;
  std::vector<double> iou;              // NaN for classes absent from pred and truth
  double miou = 0.0;                    // mean over classes with non-empty union
  std::vector<std::int64_t> confusion;  // K*K row-major, rows = ground truth
};

void accumulate_confusion(const IntTensor& pred, const IntTensor& truth, std::size_t k,
                          int ignore_index, std::vector<std::int64_t>& confusion);

IoUReport iou_from_confusion(std::vector<std::int64_t> confusion, std::size_t k);

/// Argmax segmentation of every image (plain forward, no augmentation), IoU
/// per class from the pooled confusion matrix.
IoUReport evaluate_miou(const ModelState<float>& model, const Dataset& data,
                        std::size_t batch_size = 8, int ignore_index = -1);

// --- netpbm -----------------------------------------------------------------

/// P6, 8-bit; values clamped to [0,1] and quantized round-half-to-even.
void write_ppm(const std::string& path, const Tensor<float>& image);
Tensor<float> read_ppm(const std::string& path);

/// P5; the byte value is the class index.
void write_pgm(const std::string& path, const IntTensor& label);
IntTensor read_pgm(const std::string& path);

/// NNNNN.ppm + NNNNN.pgm pairs plus manifest.txt. spec may be null when the
/// dataset did not come from the generator.
void save_dataset(const std::string& dir, const Dataset& data, const DomainSpec* spec,
                  std::uint64_t seed);
Dataset load_dataset(const std::string& dir);

}  // namespace advstyle
