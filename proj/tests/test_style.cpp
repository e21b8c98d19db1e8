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

#include <doctest.h>

#include <cmath>

#include "core/style.hpp"

using namespace advstyle;

namespace {

Tensor<float> random_image(std::vector<std::size_t> shape, std::uint64_t seed, double lo = 0.05,
                           double hi = 0.95) {
  Rng rng(seed);
  Tensor<float> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

double max_abs_diff(const Tensor<float>& a, const Tensor<float>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

void moments_of(const Tensor<float>& x, std::size_t c, double* mean, double* stdev) {
  const std::size_t hw = x.dim(1) * x.dim(2);
  double m = 0;
  for (std::size_t i = 0; i < hw; ++i) m += x[c * hw + i];
  m /= static_cast<double>(hw);
  double v = 0;
  for (std::size_t i = 0; i < hw; ++i) {
    const double d = x[c * hw + i] - m;
    v += d * d;
  }
  *mean = m;
  *stdev = std::sqrt(v / static_cast<double>(hw));
}

}  // namespace

TEST_CASE("decompose of constant and two-level images") {
  Tape<float> tape;
  Tensor<float> constant = Tensor<float>::full({3, 4, 4}, 0.5f);
  auto [xbar, stats] = decompose(tape, constant);
  for (std::size_t i = 0; i < xbar.size(); ++i) CHECK(xbar[i] == doctest::Approx(0.0));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(stats.mean[c] == doctest::Approx(0.5));
    CHECK(stats.std[c] == doctest::Approx(0.0));
  }

  Tensor<float> two({1, 2, 2}, {0.f, 1.f, 0.f, 1.f});
  auto [xbar2, stats2] = decompose(tape, two);
  CHECK(stats2.mean[0] == doctest::Approx(0.5));
  CHECK(stats2.std[0] == doctest::Approx(0.5));
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(std::fabs(xbar2[i]) - 1.0) < 1e-5);
}

TEST_CASE("recompose inverts decompose") {
  Tape<float> tape;
  Tensor<float> x = random_image({3, 8, 8}, 5);
  auto [xbar, stats] = decompose(tape, x);
  Tensor<float> back = recompose(tape, xbar, stats);
  CHECK(max_abs_diff(back, x) < 1e-5);
}

TEST_CASE("recompose trivial stats") {
  Tape<float> tape;
  Tensor<float> xbar = random_image({2, 3, 3}, 6, -1.2, 1.2);
  StyleStats<float> ident{Tensor<float>({2}), Tensor<float>::full({2}, 1.f)};
  Tensor<float> same = recompose(tape, xbar, ident);
  for (std::size_t i = 0; i < xbar.size(); ++i) CHECK(same[i] == xbar[i]);

  StyleStats<float> shift{Tensor<float>::full({2}, 0.7f), Tensor<float>::full({2}, 0.4f)};
  Tensor<float> constant = recompose(tape, Tensor<float>({2, 3, 3}), shift);
  for (std::size_t i = 0; i < constant.size(); ++i) CHECK(constant[i] == doctest::Approx(0.7));

  CHECK_THROWS_AS(recompose(tape, xbar, StyleStats<float>{Tensor<float>({3}), Tensor<float>({3})}),
                  std::invalid_argument);
}

TEST_CASE("recompose hits requested moments") {
  Tape<float> tape;
  Tensor<float> x = random_image({3, 6, 6}, 7);
  auto [xbar, stats] = decompose(tape, x);
  StyleStats<float> target{Tensor<float>::full({3}, 0.3f), Tensor<float>::full({3}, 0.2f)};
  Tensor<float> out = recompose(tape, xbar, target);
  for (std::size_t c = 0; c < 3; ++c) {
    double m, s, mb, sb;
    moments_of(out, c, &m, &s);
    moments_of(xbar, c, &mb, &sb);
    CHECK(m == doctest::Approx(0.3).epsilon(1e-5));
    CHECK(s == doctest::Approx(0.2 * sb).epsilon(1e-5));
    CHECK(std::fabs(s - 0.2) < 1e-5);  // moment contract: xbar is unit-std up to eps
  }
}

TEST_CASE("content preservation under replacement stats") {
  Tape<float> tape;
  Tensor<float> x = random_image({3, 8, 8}, 8);
  auto [xbar, stats] = decompose(tape, x);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    StyleStats<float> repl{Tensor<float>({3}), Tensor<float>({3})};
    for (std::size_t c = 0; c < 3; ++c) {
      repl.mean[c] = static_cast<float>(rng.uniform(-0.5, 1.5));
      repl.std[c] = static_cast<float>(rng.uniform(0.05, 0.6));
    }
    Tensor<float> restyled = recompose(tape, xbar, repl);
    auto [again, stats2] = decompose(tape, restyled);
    CHECK(max_abs_diff(again, xbar) < 1e-4);
  }
}

TEST_CASE("patch grid boundaries absorb remainders") {
  auto rects = patch_rects(5, 7, 2, 2);
  REQUIRE(rects.size() == 4);
  CHECK(rects[0].h == 2);
  CHECK(rects[0].w == 3);
  CHECK(rects[3].r0 == 2);
  CHECK(rects[3].c0 == 3);
  CHECK(rects[3].h == 3);
  CHECK(rects[3].w == 4);
  CHECK_THROWS_AS(patch_rects(2, 2, 3, 1), std::invalid_argument);
}

TEST_CASE("decompose_patches per-quadrant stats") {
  Tape<float> tape;
  Tensor<float> x({1, 4, 4});
  const float quad[4] = {0.1f, 0.2f, 0.3f, 0.4f};
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t xx = 0; xx < 4; ++xx) x[y * 4 + xx] = quad[(y / 2) * 2 + (xx / 2)];
  auto [xbar, grid] = decompose_patches(tape, x);
  REQUIRE(grid.cells.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(grid.cells[i].mean[0] == doctest::Approx(quad[i]));
    CHECK(grid.cells[i].std[0] == doctest::Approx(0.0));
  }

  Tensor<float> uniform = random_image({2, 4, 4}, 10);
  // same texture in every cell -> identical per-cell stats
  for (std::size_t ch = 0; ch < 2; ++ch)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t xx = 0; xx < 4; ++xx)
        uniform[(ch * 4 + y) * 4 + xx] = uniform[(ch * 4 + y % 2) * 4 + xx % 2];
  auto [ub, ugrid] = decompose_patches(tape, uniform);
  for (std::size_t i = 1; i < 4; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(ugrid.cells[i].mean[c] == doctest::Approx(ugrid.cells[0].mean[c]));
      CHECK(ugrid.cells[i].std[c] == doctest::Approx(ugrid.cells[0].std[c]));
    }
}

TEST_CASE("patch round trip and moment oracle") {
  Tape<float> tape;
  Tensor<float> x = random_image({3, 9, 11}, 11);
  auto [xbar, grid] = decompose_patches(tape, x);
  Tensor<float> back = recompose_patches(tape, xbar, grid);
  CHECK(max_abs_diff(back, x) < 1e-5);

  // arbitrary grid stats: each reconstructed patch carries exactly them
  PatchGrid<float> target = grid;
  Rng rng(12);
  for (auto& cell : target.cells)
    for (std::size_t c = 0; c < 3; ++c) {
      cell.mean = cell.mean.clone();
      cell.std = cell.std.clone();
      cell.mean[c] = static_cast<float>(rng.uniform(0.1, 0.9));
      cell.std[c] = static_cast<float>(rng.uniform(0.1, 0.5));
    }
  Tensor<float> styled = recompose_patches(tape, xbar, target);
  const auto rects = patch_rects(9, 11, 2, 2);
  for (std::size_t i = 0; i < rects.size(); ++i) {
    Tensor<float> patch = tape.crop(styled, rects[i].r0, rects[i].c0, rects[i].h, rects[i].w);
    for (std::size_t c = 0; c < 3; ++c) {
      double m, s;
      moments_of(patch, c, &m, &s);
      CHECK(m == doctest::Approx(target.cells[i].mean[c]).epsilon(1e-4));
      CHECK(s == doctest::Approx(target.cells[i].std[c]).epsilon(1e-3));
    }
  }
}

TEST_CASE("grid shifted uniformly equals whole-image shift") {
  Tape<float> tape;
  Tensor<float> x = random_image({2, 6, 6}, 13);
  auto [xbar, grid] = decompose_patches(tape, x);
  PatchGrid<float> shifted = grid;
  for (auto& cell : shifted.cells) {
    cell.mean = cell.mean.clone();
    for (std::size_t c = 0; c < 2; ++c) cell.mean[c] += 0.1f;
  }
  Tensor<float> out = recompose_patches(tape, xbar, shifted);
  Tensor<float> expect = recompose_patches(tape, xbar, grid);
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out[i] == doctest::Approx(expect[i] + 0.1f).epsilon(1e-6));
}

TEST_CASE("1x1 patch grid reduces to whole-image decompose") {
  Tape<float> tape;
  Tensor<float> x = random_image({3, 5, 5}, 14);
  auto [whole_bar, whole_stats] = decompose(tape, x);
  auto [grid_bar, grid] = decompose_patches(tape, x, 1, 1);
  REQUIRE(grid.cells.size() == 1);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(grid.cells[0].mean[c] == whole_stats.mean[c]);
    CHECK(grid.cells[0].std[c] == whole_stats.std[c]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(grid_bar[i] == whole_bar[i]);
}

TEST_CASE("lab conversion endpoints and reference colors") {
  Tape<float> tape;
  Tensor<float> black({3, 1, 1});
  Tensor<float> lab0 = tape.rgb_to_lab(black);
  CHECK(std::fabs(lab0[0]) < 1e-6);
  CHECK(std::fabs(lab0[1]) < 1e-6);
  CHECK(std::fabs(lab0[2]) < 1e-6);

  Tensor<float> white = Tensor<float>::full({3, 1, 1}, 1.f);
  Tensor<float> lab1 = tape.rgb_to_lab(white);
  CHECK(lab1[0] == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(std::fabs(lab1[1]) < 0.01);
  CHECK(std::fabs(lab1[2]) < 0.01);

  // sRGB primaries under D65, reference CIELAB coordinates
  struct Ref {
    float r, g, b;
    double L, a, bb;
  };
  const Ref refs[] = {
      {1.f, 0.f, 0.f, 53.2408, 80.0925, 67.2032},
      {0.f, 1.f, 0.f, 87.7347, -86.1827, 83.1793},
      {0.f, 0.f, 1.f, 32.2970, 79.1875, -107.8602},
  };
  for (const Ref& ref : refs) {
    Tensor<float> px({3, 1, 1}, {ref.r, ref.g, ref.b});
    Tensor<float> lab = tape.rgb_to_lab(px);
    CHECK(lab[0] == doctest::Approx(ref.L).epsilon(1e-4));
    CHECK(lab[1] == doctest::Approx(ref.a).epsilon(1e-3));
    CHECK(lab[2] == doctest::Approx(ref.bb).epsilon(1e-3));
  }

  CHECK_THROWS_AS(tape.rgb_to_lab(Tensor<float>({2, 2, 2})), std::invalid_argument);
}

TEST_CASE("lab round trip on in-gamut images") {
  Tape<float> tape;
  Tensor<float> x = random_image({3, 8, 8}, 15, 0.0, 1.0);
  Tensor<float> back = tape.lab_to_rgb(tape.rgb_to_lab(x));
  CHECK(max_abs_diff(back, x) < 1e-4);
}
