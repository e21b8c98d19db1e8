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

#include "core/augment.hpp"

using namespace advstyle;

namespace {

LabeledImage random_sample(std::size_t h, std::size_t w, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  LabeledImage s;
  s.image = Tensor<float>({3, h, w});
  for (std::size_t i = 0; i < s.image.size(); ++i)
    s.image[i] = static_cast<float>(rng.uniform(0.1, 0.9));
  s.label = IntTensor({h, w});
  for (std::size_t i = 0; i < s.label.size(); ++i)
    s.label[i] = static_cast<std::int32_t>(rng.index(k));
  return s;
}

ModelState<float> small_model(std::uint64_t seed, std::size_t k = 3) {
  ModelConfig cfg;
  cfg.widths = {4, 6};
  cfg.num_classes = k;
  return build_model<float>(cfg, seed);
}

double frozen_loss(const ModelState<float>& model, const LabeledImage& s) {
  Tape<float> tape;
  std::vector<Tensor<float>> parts{s.image.detached()};
  Tensor<float> logits = model_forward(
      tape, model, tape.stack(std::span<const Tensor<float>>(parts)), /*frozen=*/true);
  IntTensor labels({1, s.label.dim(0), s.label.dim(1)},
                   std::vector<std::int32_t>(s.label.data(), s.label.data() + s.label.size()));
  return tape.pixelwise_cross_entropy(logits, labels, -1)[0];
}

double max_abs_diff(const Tensor<float>& a, const Tensor<float>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

Tensor<float> normalized_content(const Tensor<float>& image) {
  Tape<float> tape;
  auto [xbar, stats] = decompose(tape, image.detached());
  return xbar.detached();
}

}  // namespace

TEST_CASE("paper defaults are wired in") {
  CHECK(AdvConfig{}.gamma == 3.0);
  CHECK(AdvConfig{}.steps == 1);
}

TEST_CASE("adv step with a linear probe has the analytic gradient") {
  // loss = sum_c w_c * channel_mean(xhat): d loss / d mu_c = w_c exactly
  Rng rng(5);
  Tensor<float> xbar({3, 4, 4});
  for (std::size_t i = 0; i < xbar.size(); ++i) xbar[i] = static_cast<float>(rng.uniform(-1, 1));
  StyleStats<float> stats{Tensor<float>({3}, {0.4f, 0.5f, 0.6f}),
                          Tensor<float>({3}, {0.2f, 0.3f, 0.4f})};
  Tensor<float> w({3}, {0.25f, -0.5f, 1.5f});
  StyledLossFn<float> probe = [w](Tape<float>& tape, const Tensor<float>& xhat) {
    auto [mean, stdev] = tape.channel_moments(xhat);
    return tape.sum(tape.mul(mean, w));
  };
  const double gamma = 0.7;
  StyleStats<float> out = adv_style_step_with_loss<float>(probe, xbar, stats, gamma);
  for (std::size_t c = 0; c < 3; ++c)
    CHECK(out.mean[c] == doctest::Approx(stats.mean[c] + gamma * w[c]).epsilon(1e-5));

  CHECK_THROWS_AS(adv_style_step_with_loss<float>(probe, xbar, stats, -1.0),
                  std::invalid_argument);
}

TEST_CASE("gamma zero leaves stats and image unchanged") {
  ModelState<float> model = small_model(11);
  LabeledImage s = random_sample(8, 8, 3, 12);
  Tape<float> tape;
  auto [xbar, stats] = decompose(tape, s.image.detached());
  StyleStats<float> same =
      adv_style_step(model, xbar.detached(), stats.detached(), s.label, 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(same.mean[c] == stats.mean[c]);
    CHECK(same.std[c] == stats.std[c]);
  }

  AdvConfig cfg;
  cfg.gamma = 0.0;
  LabeledImage out = adv_style_augment(model, s, cfg);
  CHECK(max_abs_diff(out.image, s.image) < 1e-5);
}

TEST_CASE("one-step ascent raises the frozen loss in >= 95% of seeded trials") {
  std::size_t ascended = 0;
  const std::size_t trials = 100;
  for (std::size_t t = 0; t < trials; ++t) {
    ModelState<float> model = small_model(1000 + t);
    LabeledImage s = random_sample(12, 12, 3, 2000 + t);
    AdvConfig cfg;
    cfg.gamma = 0.05;
    LabeledImage adv = adv_style_augment(model, s, cfg);
    if (frozen_loss(model, adv) >= frozen_loss(model, s)) ++ascended;
  }
  CHECK(ascended >= 95);
}

TEST_CASE("three small steps land near one large step") {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ModelState<float> model = small_model(300 + seed);
    LabeledImage s = random_sample(10, 10, 3, 400 + seed);
    AdvConfig one;
    one.gamma = 0.6;
    AdvConfig three;
    three.gamma = 0.2;
    three.steps = 3;
    const double l1 = frozen_loss(model, adv_style_augment(model, s, one));
    const double l3 = frozen_loss(model, adv_style_augment(model, s, three));
    worst = std::max(worst, std::fabs(l1 - l3) / std::max(std::fabs(l1), 1e-9));
  }
  CHECK(worst < 0.2);
}

TEST_CASE("patch variant learns four independent cell stats jointly") {
  ModelState<float> model = small_model(21);
  LabeledImage s = random_sample(8, 8, 3, 22);
  AdvConfig cfg;
  cfg.gamma = 0.5;
  cfg.granularity = StyleGranularity::kPatches2x2;
  AugProvenance prov;
  LabeledImage out = adv_style_augment(model, s, cfg, &prov);
  CHECK(prov.strategy == "advstyle_patches");
  REQUIRE(prov.mu_before.size() == 12);  // 4 cells x 3 channels
  bool some_cell_moved = false;
  bool cells_differ = false;
  for (std::size_t cell = 0; cell < 4; ++cell)
    for (std::size_t c = 0; c < 3; ++c) {
      const float delta = prov.mu_after[cell * 3 + c] - prov.mu_before[cell * 3 + c];
      if (std::fabs(delta) > 1e-7) some_cell_moved = true;
      if (cell > 0) {
        const float other = prov.mu_after[c] - prov.mu_before[c];
        if (std::fabs(delta - other) > 1e-7) cells_differ = true;
      }
    }
  CHECK(some_cell_moved);
  CHECK(cells_differ);
  CHECK(out.image.shape() == s.image.shape());
}

TEST_CASE("lab-space variant styles through the color conversion") {
  ModelState<float> model = small_model(31);
  LabeledImage s = random_sample(8, 8, 3, 32);
  AdvConfig cfg;
  cfg.gamma = 0.0;
  cfg.space = StyleSpace::kLAB;
  // gamma 0 in LAB space degenerates to a LAB round trip of the image
  LabeledImage out = adv_style_augment(model, s, cfg);
  CHECK(max_abs_diff(out.image, s.image) < 1e-3);

  cfg.gamma = 2.0;
  LabeledImage adv = adv_style_augment(model, s, cfg);
  CHECK(max_abs_diff(adv.image, s.image) > 1e-4);  // the style actually moved
  CHECK(adv.label.same_storage(s.label));
}

TEST_CASE("rand_style identity, determinism, and noise scale") {
  LabeledImage s = random_sample(8, 8, 3, 41);
  LabeledImage zero = rand_style(s, 0.0, 7);
  CHECK(max_abs_diff(zero.image, s.image) < 1e-5);

  LabeledImage a = rand_style(s, 0.1, 9);
  LabeledImage b = rand_style(s, 0.1, 9);
  for (std::size_t i = 0; i < a.image.size(); ++i) CHECK(a.image[i] == b.image[i]);

  // over many draws the output channel means scatter like the injected noise
  const double noise_std = 0.07;
  const std::size_t draws = 1000;
  std::array<double, 3> sum{}, sumsq{};
  for (std::size_t d = 0; d < draws; ++d) {
    LabeledImage r = rand_style(s, noise_std, 100 + d);
    Tape<float> tape;
    auto [mean, stdev] = tape.channel_moments(r.image.detached());
    for (std::size_t c = 0; c < 3; ++c) {
      sum[c] += mean[c];
      sumsq[c] += static_cast<double>(mean[c]) * mean[c];
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    const double m = sum[c] / draws;
    const double sd = std::sqrt(sumsq[c] / draws - m * m);
    CHECK(std::fabs(sd - noise_std) / noise_std < 0.1);
  }

  CHECK_THROWS_AS(rand_style(s, -0.1, 1), std::invalid_argument);
}

TEST_CASE("mix_style endpoints and convexity") {
  LabeledImage a = random_sample(6, 6, 3, 51);
  LabeledImage b = random_sample(6, 6, 3, 52);
  CHECK(max_abs_diff(mix_style(a, b, 1.0).image, a.image) < 1e-5);

  LabeledImage bstyle = mix_style(a, b, 0.0);
  Tape<float> tape;
  auto [ma, sa] = tape.channel_moments(bstyle.image.detached());
  auto [mb, sb] = tape.channel_moments(b.image.detached());
  for (std::size_t c = 0; c < 3; ++c) CHECK(ma[c] == doctest::Approx(mb[c]).epsilon(1e-4));

  // engineered means: 0.5 * 0.2 + 0.5 * 0.6 = 0.4
  LabeledImage lo = a, hi = b;
  lo.image = lo.image.clone();
  hi.image = hi.image.clone();
  {
    Tape<float> t;
    auto [mlo, slo] = t.channel_moments(lo.image);
    auto [mhi, shi] = t.channel_moments(hi.image);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < 36; ++i) {
        lo.image[c * 36 + i] += 0.2f - mlo[c];
        hi.image[c * 36 + i] += 0.6f - mhi[c];
      }
  }
  LabeledImage mid = mix_style(lo, hi, 0.5);
  Tape<float> t2;
  auto [mm, sm] = t2.channel_moments(mid.image.detached());
  for (std::size_t c = 0; c < 3; ++c) CHECK(mm[c] == doctest::Approx(0.4).epsilon(1e-4));

  CHECK_THROWS_AS(mix_style(a, b, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(mix_style(a, b, -0.1), std::invalid_argument);
}

TEST_CASE("cross_style swaps and double-swap restores") {
  LabeledImage a = random_sample(6, 6, 3, 61);
  LabeledImage b = random_sample(6, 6, 3, 62);

  auto [same_a, same_b] = cross_style(a, a);
  CHECK(max_abs_diff(same_a.image, a.image) < 1e-5);

  AugProvenance pa;
  auto [swapped_a, swapped_b] = cross_style(a, b, &pa, nullptr);
  Tape<float> tape;
  auto [msa, ssa] = tape.channel_moments(swapped_a.image.detached());
  auto [mb, sb] = tape.channel_moments(b.image.detached());
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(msa[c] == doctest::Approx(mb[c]).epsilon(1e-4));
    CHECK(ssa[c] == doctest::Approx(sb[c]).epsilon(1e-3));
  }
  CHECK(pa.strategy == "crossstyle");

  auto [restored_a, restored_b] = cross_style(swapped_a, swapped_b);
  CHECK(max_abs_diff(restored_a.image, a.image) < 1e-5);
  CHECK(max_abs_diff(restored_b.image, b.image) < 1e-5);
}

TEST_CASE("adv_pixel identity at lr zero and analytic single-pixel probe") {
  ModelState<float> model = small_model(71);
  LabeledImage s = random_sample(6, 6, 3, 72);
  LabeledImage still = adv_pixel(model, s, 0.0, 1);
  for (std::size_t i = 0; i < s.image.size(); ++i) CHECK(still.image[i] == s.image[i]);
  CHECK_THROWS_AS(adv_pixel(model, s, -1.0, 1), std::invalid_argument);

  // hand-built effectively-linear model on a single pixel:
  // f = relu(wr*r + wg*g + wb*b + br) with br large, z0 = a*f, z1 = 0,
  // label 1 => dL/dr = sigmoid(z0) * a * wr
  ModelConfig cfg;
  cfg.widths = {1};
  cfg.num_classes = 2;
  ModelState<float> probe = build_model<float>(cfg, 0);
  for (std::size_t i = 0; i < probe.stages[0].weight.size(); ++i)
    probe.stages[0].weight[i] = 0.f;
  const double wr = 0.8, wg = -0.3, wb = 0.5, br = 10.0, head_a = 0.7;
  // center taps of the 3x3 kernel per input channel
  probe.stages[0].weight[0 * 9 + 4] = static_cast<float>(wr);
  probe.stages[0].weight[1 * 9 + 4] = static_cast<float>(wg);
  probe.stages[0].weight[2 * 9 + 4] = static_cast<float>(wb);
  probe.stages[0].bias[0] = static_cast<float>(br);
  probe.head.weight[0] = static_cast<float>(head_a);
  probe.head.weight[1] = 0.f;
  probe.head.bias[0] = 0.f;
  probe.head.bias[1] = 0.f;

  LabeledImage px;
  px.image = Tensor<float>({3, 1, 1}, {0.3f, 0.6f, 0.2f});
  px.label = IntTensor({1, 1}, {1});
  const double lr = 10.0;  // paper's AdvPixel learning rate
  LabeledImage out = adv_pixel(probe, px, lr, 1);

  const double f = wr * 0.3 + wg * 0.6 + wb * 0.2 + br;
  const double z0 = head_a * f;
  const double sig = 1.0 / (1.0 + std::exp(-z0));
  const double expect_r = 0.3 + lr * sig * head_a * wr;
  CHECK(out.image[0] == doctest::Approx(expect_r).epsilon(1e-5));
  CHECK(out.image[1] == doctest::Approx(0.6 + lr * sig * head_a * wg).epsilon(1e-5));
  CHECK(out.image[2] == doctest::Approx(0.2 + lr * sig * head_a * wb).epsilon(1e-5));
}

TEST_CASE("labels are the same objects and content is preserved by style ops") {
  ModelState<float> model = small_model(81);
  LabeledImage s = random_sample(10, 10, 3, 82);
  LabeledImage partner = random_sample(10, 10, 3, 83);
  Tensor<float> content = normalized_content(s.image);

  AdvConfig cfg;
  cfg.gamma = 0.5;
  std::vector<LabeledImage> style_family = {
      adv_style_augment(model, s, cfg),
      rand_style(s, 0.1, 5),
      mix_style(s, partner, 0.3),
      cross_style(s, partner).first,
  };
  for (const auto& out : style_family) {
    CHECK(out.label.same_storage(s.label));
    CHECK(max_abs_diff(normalized_content(out.image), content) < 1e-4);
  }

  LabeledImage pixel = adv_pixel(model, s, 10.0, 1);
  CHECK(pixel.label.same_storage(s.label));
  // the distinguishing property: pixel-space ascent does change the content
  CHECK(max_abs_diff(normalized_content(pixel.image), content) > 1e-3);
}

TEST_CASE("no augmentation touches parameter gradients") {
  ModelState<float> model = small_model(91);
  LabeledImage s = random_sample(8, 8, 3, 92);
  LabeledImage partner = random_sample(8, 8, 3, 93);
  AdvConfig cfg;
  adv_style_augment(model, s, cfg);
  adv_pixel(model, s, 10.0, 1);
  rand_style(s, 0.1, 3);
  mix_style(s, partner, 0.5);
  cross_style(s, partner);
  for (const auto& p : model.parameters()) CHECK_FALSE(p.grad_present());
}

TEST_CASE("identical seeds and inputs give bit-identical augmentations") {
  ModelState<float> model = small_model(101);
  LabeledImage s = random_sample(8, 8, 3, 102);
  AdvConfig cfg;
  cfg.gamma = 1.0;
  LabeledImage a = adv_style_augment(model, s, cfg);
  LabeledImage b = adv_style_augment(model, s, cfg);
  for (std::size_t i = 0; i < a.image.size(); ++i) CHECK(a.image[i] == b.image[i]);
}

TEST_CASE("policy_select draws categorically") {
  Rng rng(111);
  const double single[1] = {1.0};
  CHECK(policy_select(1, std::span<const double>(single, 1), rng) == 0);

  const double first_only[2] = {1.0, 0.0};
  for (int i = 0; i < 20; ++i)
    CHECK(policy_select(2, std::span<const double>(first_only, 2), rng) == 0);

  const double uniform[2] = {0.5, 0.5};
  std::size_t count0 = 0;
  const std::size_t draws = 10000;
  for (std::size_t i = 0; i < draws; ++i)
    if (policy_select(2, std::span<const double>(uniform, 2), rng) == 0) ++count0;
  const double freq = static_cast<double>(count0) / draws;
  CHECK(freq >= 0.47);
  CHECK(freq <= 0.53);

  CHECK_THROWS_AS(policy_select(0, std::span<const double>(), rng), std::invalid_argument);
  const double badsum[2] = {0.7, 0.7};
  CHECK_THROWS_AS(policy_select(2, std::span<const double>(badsum, 2), rng),
                  std::invalid_argument);
}

TEST_CASE("invocation counter moves with augmentations") {
  LabeledImage s = random_sample(4, 4, 3, 121);
  const std::uint64_t before = augmentation_invocation_count();
  rand_style(s, 0.05, 1);
  CHECK(augmentation_invocation_count() == before + 1);
}
