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

#include "core/model.hpp"
#include "core/style.hpp"

using namespace advstyle;

namespace {

Tensor<float> random_input(std::size_t n, std::size_t c, std::size_t h, std::size_t w,
                           std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({n, c, h, w});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(0.0, 1.0));
  return t;
}

}  // namespace

TEST_CASE("build_model is seed deterministic") {
  ModelConfig cfg;
  cfg.widths = {8, 8};
  ModelState<float> a = build_model<float>(cfg, 7);
  ModelState<float> b = build_model<float>(cfg, 7);
  ModelState<float> c = build_model<float>(cfg, 8);
  auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    for (std::size_t j = 0; j < pa[i].size(); ++j) {
      CHECK(pa[i][j] == pb[i][j]);
      any_diff = any_diff || (pa[i][j] != pc[i][j]);
    }
  CHECK(any_diff);
}

TEST_CASE("single-stage model has one conv plus the head") {
  ModelConfig cfg;
  cfg.widths = {4};
  ModelState<float> m = build_model<float>(cfg, 1);
  std::size_t weight_tensors = 0;
  for (const auto& p : m.parameters())
    if (p.rank() == 4) ++weight_tensors;
  CHECK(weight_tensors == 2);
}

TEST_CASE("He init std is near sqrt(2/fan_in)") {
  ModelConfig cfg;
  cfg.in_channels = 16;  // fan_in = 16*9 = 144
  cfg.widths = {64};
  ModelState<float> m = build_model<float>(cfg, 1234);
  const Tensor<float>& w = m.stages[0].weight;
  double mean = 0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += w[i];
  mean /= static_cast<double>(w.size());
  double var = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(w.size());
  const double expected = std::sqrt(2.0 / 144.0);
  CHECK(std::fabs(std::sqrt(var) - expected) / expected < 0.2);
  for (std::size_t i = 0; i < m.stages[0].bias.size(); ++i) CHECK(m.stages[0].bias[i] == 0.f);
}

TEST_CASE("zero head weights give a uniform-logit loss of ln K") {
  ModelConfig cfg;
  cfg.widths = {6};
  cfg.num_classes = 19;
  ModelState<float> m = build_model<float>(cfg, 3);
  for (std::size_t i = 0; i < m.head.weight.size(); ++i) m.head.weight[i] = 0.f;
  for (std::size_t i = 0; i < m.head.bias.size(); ++i) m.head.bias[i] = 0.f;
  Tensor<float> img = random_input(1, 3, 6, 6, 17);
  IntTensor labels({1, 6, 6});
  Tape<float> tape;
  Tensor<float> loss = seg_loss(tape, model_forward(tape, m, img), labels);
  CHECK(loss[0] == doctest::Approx(std::log(19.0)).epsilon(1e-6));
}

TEST_CASE("logits keep the input resolution for every config") {
  for (std::size_t stages : {std::size_t{1}, std::size_t{3}}) {
    ModelConfig cfg;
    cfg.widths.assign(stages, 5);
    cfg.num_classes = 4;
    ModelState<float> m = build_model<float>(cfg, 5);
    Tensor<float> img = random_input(2, 3, 7, 9, 18);
    Tape<float> tape;
    Tensor<float> logits = model_forward(tape, m, img);
    CHECK(logits.shape() == std::vector<std::size_t>{2, 4, 7, 9});
  }
}

TEST_CASE("identity style hook leaves logits bit-identical at every position") {
  ModelConfig cfg;
  cfg.widths = {4, 6, 4};
  ModelState<float> base = build_model<float>(cfg, 9);
  Tensor<float> img = random_input(1, 3, 6, 6, 19);
  Tape<float> t0;
  Tensor<float> plain = model_forward(t0, base, img, true);
  StyleHook<float> identity = [](Tape<float>&, const Tensor<float>& x) { return x; };
  for (std::size_t pos = 1; pos <= 3; ++pos) {
    ModelState<float> m = base;
    m.config.injection_position = pos;
    Tape<float> tape;
    Tensor<float> hooked = model_forward(tape, m, img, true, &identity);
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(hooked[i] == plain[i]);
  }
}

TEST_CASE("decompose/recompose hook with captured stats is also the identity") {
  // a hook that re-applies each sample's own stats reproduces the feature map
  ModelConfig cfg;
  cfg.widths = {4, 6};
  cfg.injection_position = 2;
  ModelState<float> m = build_model<float>(cfg, 10);
  Tensor<float> img = random_input(2, 3, 6, 6, 20);
  StyleHook<float> rebuild = [](Tape<float>& tape, const Tensor<float>& feat) {
    std::vector<Tensor<float>> parts;
    for (std::size_t n = 0; n < feat.dim(0); ++n) {
      auto [xbar, stats] = decompose(tape, tape.select(feat, n));
      parts.push_back(recompose(tape, xbar, stats));
    }
    return tape.stack(std::span<const Tensor<float>>(parts));
  };
  Tape<float> t1, t2;
  Tensor<float> plain = model_forward(t1, m, img, true);
  Tensor<float> hooked = model_forward(t2, m, img, true, &rebuild);
  double worst = 0;
  for (std::size_t i = 0; i < plain.size(); ++i)
    worst = std::max(worst, std::fabs(static_cast<double>(plain[i]) - hooked[i]));
  CHECK(worst < 1e-4);
}

TEST_CASE("channel mismatch raises") {
  ModelConfig cfg;
  ModelState<float> m = build_model<float>(cfg, 4);
  Tape<float> tape;
  CHECK_THROWS_AS(model_forward(tape, m, Tensor<float>({1, 4, 6, 6})), std::invalid_argument);
}

TEST_CASE("seeded determinism of the forward pass") {
  ModelConfig cfg;
  cfg.widths = {6, 6};
  ModelState<float> m1 = build_model<float>(cfg, 77);
  ModelState<float> m2 = build_model<float>(cfg, 77);
  Tensor<float> img = random_input(1, 3, 8, 8, 21);
  Tape<float> t1, t2;
  Tensor<float> a = model_forward(t1, m1, img, true);
  Tensor<float> b = model_forward(t2, m2, img, true);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("frozen forward leaves parameter gradients untouched") {
  ModelConfig cfg;
  cfg.widths = {4};
  ModelState<float> m = build_model<float>(cfg, 12);
  Tensor<float> img = random_input(1, 3, 5, 5, 22);
  img.set_requires_grad(true);
  IntTensor labels({1, 5, 5});
  Tape<float> tape;
  tape.backward(seg_loss(tape, model_forward(tape, m, img, true), labels));
  CHECK(img.grad_present());
  for (const auto& p : m.parameters()) CHECK_FALSE(p.grad_present());
}
