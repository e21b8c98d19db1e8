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

#include <utility>
#include <vector>

#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace advstyle {

/// Epsilon added to sigma in the normalization denominator so constant
/// channels stay finite.
inline constexpr double kStyleEps = 1e-6;

/// Per-channel mean and standard deviation of an image or feature map.
template <typename T>
struct StyleStats {
  Tensor<T> mean;  // [C]
  Tensor<T> std;   // [C]

  std::size_t channels() const { return mean.size(); }

  StyleStats detached() const { return {mean.detached(), std.detached()}; }
  StyleStats clone() const { return {mean.clone(), std.clone()}; }
};

struct PatchRect {
  std::size_t r0, c0, h, w;
};

/// rows x cols tiling of an H x W image; the last row/column absorbs any
/// remainder pixels.
std::vector<PatchRect> patch_rects(std::size_t h, std::size_t w, std::size_t rows,
                                   std::size_t cols);

template <typename T>
struct PatchGrid {
  std::size_t rows = 0, cols = 0;
  std::size_t image_h = 0, image_w = 0;
  std::vector<StyleStats<T>> cells;  // row-major
};

/// x -> ((x - mu) / (sigma + eps), (mu, sigma)). The returned stats are the
/// raw moments; only the normalization denominator carries eps.
template <typename T>
std::pair<Tensor<T>, StyleStats<T>> decompose(Tape<T>& tape, const Tensor<T>& x,
                                              T eps = static_cast<T>(kStyleEps)) {
  auto [mean, stdev] = tape.channel_moments(x);
  Tensor<T> denom = tape.add_scalar(stdev, eps);
  Tensor<T> xbar = tape.div(tape.sub(x, mean), denom);
  return {xbar, StyleStats<T>{mean, stdev}};
}

/// xbar * sigma + mu per channel.
template <typename T>
Tensor<T> recompose(Tape<T>& tape, const Tensor<T>& xbar, const StyleStats<T>& s) {
  if (xbar.rank() != 3 || s.channels() != xbar.dim(0) || s.std.size() != s.mean.size())
    throw std::invalid_argument("recompose: channel mismatch, image " +
                                shape_str(xbar.shape()) + " vs stats with " +
                                std::to_string(s.channels()) + " channels");
  return tape.channel_affine(xbar, s.std, s.mean);
}

template <typename T>
std::pair<Tensor<T>, PatchGrid<T>> decompose_patches(Tape<T>& tape, const Tensor<T>& x,
                                                     std::size_t rows = 2, std::size_t cols = 2,
                                                     T eps = static_cast<T>(kStyleEps)) {
  if (x.rank() != 3)
    throw std::invalid_argument("decompose_patches: expected [C,H,W], got " +
                                shape_str(x.shape()));
  const std::size_t h = x.dim(1), w = x.dim(2);
  PatchGrid<T> grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.image_h = h;
  grid.image_w = w;
  Tensor<T> xbar;
  bool first = true;
  for (const PatchRect& r : patch_rects(h, w, rows, cols)) {
    auto [pbar, stats] = decompose(tape, tape.crop(x, r.r0, r.c0, r.h, r.w), eps);
    grid.cells.push_back(stats);
    Tensor<T> placed = tape.embed(pbar, h, w, r.r0, r.c0);
    xbar = first ? placed : tape.add(xbar, placed);
    first = false;
  }
  return {xbar, grid};
}

template <typename T>
Tensor<T> recompose_patches(Tape<T>& tape, const Tensor<T>& xbar, const PatchGrid<T>& grid) {
  if (xbar.rank() != 3)
    throw std::invalid_argument("recompose_patches: expected [C,H,W], got " +
                                shape_str(xbar.shape()));
  const std::size_t h = xbar.dim(1), w = xbar.dim(2);
  if (h != grid.image_h || w != grid.image_w)
    throw std::invalid_argument("recompose_patches: image extent " + shape_str(xbar.shape()) +
                                " does not match the grid's source image");
  const auto rects = patch_rects(h, w, grid.rows, grid.cols);
  if (rects.size() != grid.cells.size())
    throw std::invalid_argument("recompose_patches: grid holds " +
                                std::to_string(grid.cells.size()) + " cells, expected " +
                                std::to_string(rects.size()));
  Tensor<T> out;
  bool first = true;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const PatchRect& r = rects[i];
    Tensor<T> patch = recompose(tape, tape.crop(xbar, r.r0, r.c0, r.h, r.w), grid.cells[i]);
    Tensor<T> placed = tape.embed(patch, h, w, r.r0, r.c0);
    out = first ? placed : tape.add(out, placed);
    first = false;
  }
  return out;
}

/// Clamps tensor values into [0, 1] in place (outside any graph).
template <typename T>
void clamp01(Tensor<T>& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = x[i] < T(0) ? T(0) : (x[i] > T(1) ? T(1) : x[i]);
}

}  // namespace advstyle
