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

#include "core/augment.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace advstyle {

namespace {

std::atomic<std::uint64_t> g_invocations{0};

IntTensor batched_label(const IntTensor& label) {
  if (label.rank() != 2)
    throw std::invalid_argument("augment: label must be [H,W], got " + shape_str(label.shape()));
  return IntTensor({1, label.dim(0), label.dim(1)},
                   std::vector<std::int32_t>(label.data(), label.data() + label.size()));
}

/// Cross-entropy of the frozen model on a styled image; converts back from
/// LAB first when the style lives there, so the ascent gradient flows through
/// the color conversion.
StyledLossFn<float> frozen_model_loss(const ModelState<float>& model, const IntTensor& label,
                                      int ignore_index, bool lab_space) {
  IntTensor blabel = batched_label(label);
  return [model, blabel, ignore_index, lab_space](Tape<float>& tape,
                                                  const Tensor<float>& xhat) {
    Tensor<float> img = lab_space ? tape.lab_to_rgb(xhat) : xhat;
    std::vector<Tensor<float>> parts{img};
    Tensor<float> logits =
        model_forward(tape, model, tape.stack(std::span<const Tensor<float>>(parts)),
                      /*frozen=*/true);
    return tape.pixelwise_cross_entropy(logits, blabel, ignore_index);
  };
}

void fill_prov(AugProvenance* prov, const char* strategy, const StyleStats<float>& before,
               const StyleStats<float>& after) {
  if (!prov) return;
  prov->strategy = strategy;
  for (std::size_t c = 0; c < before.channels(); ++c) {
    prov->mu_before.push_back(before.mean[c]);
    prov->sd_before.push_back(before.std[c]);
    prov->mu_after.push_back(after.mean[c]);
    prov->sd_after.push_back(after.std[c]);
  }
}

std::pair<Tensor<float>, StyleStats<float>> decompose_plain(const Tensor<float>& image) {
  Tape<float> tape;
  auto [xbar, stats] = decompose(tape, image.detached());
  return {xbar.detached(), stats.detached()};
}

}  // namespace

void AdvConfig::validate() const {
  if (gamma < 0) throw std::invalid_argument("adv: gamma must be >= 0");
  if (steps < 1) throw std::invalid_argument("adv: steps must be >= 1");
  if (clamp_std_min <= 0) throw std::invalid_argument("adv: clamp_std_min must be > 0");
}

std::uint64_t augmentation_invocation_count() { return g_invocations.load(); }

StyleStats<float> adv_style_step(const ModelState<float>& model, const Tensor<float>& xbar,
                                 const StyleStats<float>& stats, const IntTensor& label,
                                 double gamma, double clamp_std_min, int ignore_index) {
  return adv_style_step_with_loss<float>(frozen_model_loss(model, label, ignore_index, false),
                                         xbar, stats, gamma, clamp_std_min);
}

LabeledImage adv_style_augment(const ModelState<float>& model, const LabeledImage& sample,
                               const AdvConfig& cfg, AugProvenance* prov, int ignore_index) {
  cfg.validate();
  g_invocations.fetch_add(1);
  const bool lab = cfg.space == StyleSpace::kLAB;

  Tensor<float> base = sample.image.detached();
  if (lab) {
    Tape<float> tape;
    base = tape.rgb_to_lab(base).detached();
  }
  const StyledLossFn<float> loss_fn =
      frozen_model_loss(model, sample.label, ignore_index, lab);

  Tensor<float> styled;
  if (cfg.granularity == StyleGranularity::kWhole) {
    auto [xbar, initial] = decompose_plain(base);
    StyleStats<float> stats = initial.clone();
    for (std::size_t step = 0; step < cfg.steps; ++step)
      stats = adv_style_step_with_loss<float>(loss_fn, xbar, stats, cfg.gamma,
                                              cfg.clamp_std_min);
    Tape<float> tape;
    styled = tape.channel_affine(xbar, stats.std, stats.mean);
    fill_prov(prov, "advstyle", initial, stats);
  } else {
    const std::size_t h = base.dim(1), w = base.dim(2);
    const auto rects = patch_rects(h, w, 2, 2);
    Tensor<float> xbar;
    std::vector<StyleStats<float>> cells;
    {
      Tape<float> tape;
      auto [xb, grid] = decompose_patches(tape, base);
      xbar = xb.detached();
      for (const auto& s : grid.cells) cells.push_back(s.detached());
    }
    const std::vector<StyleStats<float>> initial = cells;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
      // all four cell stats are learned jointly from one backward
      Tape<float> tape;
      std::vector<Tensor<float>> mus, sigmas;
      Tensor<float> assembled;
      for (std::size_t i = 0; i < rects.size(); ++i) {
        Tensor<float> mu = cells[i].mean.clone();
        Tensor<float> sg = cells[i].std.clone();
        mu.set_requires_grad(true);
        sg.set_requires_grad(true);
        mus.push_back(mu);
        sigmas.push_back(sg);
        const PatchRect& r = rects[i];
        Tensor<float> patch =
            tape.channel_affine(tape.crop(xbar, r.r0, r.c0, r.h, r.w), sg, mu);
        Tensor<float> placed = tape.embed(patch, h, w, r.r0, r.c0);
        assembled = (i == 0) ? placed : tape.add(assembled, placed);
      }
      tape.backward(loss_fn(tape, assembled));
      for (std::size_t i = 0; i < rects.size(); ++i) {
        StyleStats<float> next{Tensor<float>(mus[i].shape()), Tensor<float>(sigmas[i].shape())};
        for (std::size_t c = 0; c < mus[i].size(); ++c) {
          next.mean[c] = mus[i][c] + static_cast<float>(cfg.gamma) * mus[i].grad()[c];
          float s = sigmas[i][c] + static_cast<float>(cfg.gamma) * sigmas[i].grad()[c];
          if (s < static_cast<float>(cfg.clamp_std_min))
            s = static_cast<float>(cfg.clamp_std_min);
          next.std[c] = s;
        }
        cells[i] = next;
      }
    }
    Tape<float> tape;
    PatchGrid<float> grid;
    grid.rows = 2;
    grid.cols = 2;
    grid.image_h = h;
    grid.image_w = w;
    grid.cells = cells;
    styled = recompose_patches(tape, xbar, grid);
    if (prov) {
      prov->strategy = "advstyle_patches";
      for (std::size_t i = 0; i < cells.size(); ++i) {
        AugProvenance cell;
        fill_prov(&cell, "", initial[i], cells[i]);
        prov->mu_before.insert(prov->mu_before.end(), cell.mu_before.begin(),
                               cell.mu_before.end());
        prov->sd_before.insert(prov->sd_before.end(), cell.sd_before.begin(),
                               cell.sd_before.end());
        prov->mu_after.insert(prov->mu_after.end(), cell.mu_after.begin(), cell.mu_after.end());
        prov->sd_after.insert(prov->sd_after.end(), cell.sd_after.begin(), cell.sd_after.end());
      }
    }
  }

  if (lab) {
    Tape<float> tape;
    styled = tape.lab_to_rgb(styled.detached());
  }
  Tensor<float> out = styled.detached();
  if (cfg.clamp_image) {
    out = out.clone();
    clamp01(out);
  }
  return {out, sample.label};
}

LabeledImage rand_style(const LabeledImage& sample, double noise_std, std::uint64_t seed,
                        AugProvenance* prov) {
  if (noise_std < 0) throw std::invalid_argument("rand_style: noise_std must be >= 0");
  g_invocations.fetch_add(1);
  Tape<float> tape;
  auto [xbar, stats] = decompose(tape, sample.image.detached());
  Rng rng(seed);
  StyleStats<float> next{Tensor<float>(stats.mean.shape()), Tensor<float>(stats.std.shape())};
  for (std::size_t c = 0; c < stats.channels(); ++c)
    next.mean[c] = stats.mean[c] + static_cast<float>(rng.normal(0.0, noise_std));
  for (std::size_t c = 0; c < stats.channels(); ++c) {
    float s = stats.std[c] + static_cast<float>(rng.normal(0.0, noise_std));
    if (s < static_cast<float>(kStdFloor)) s = static_cast<float>(kStdFloor);
    next.std[c] = s;
  }
  Tensor<float> out = tape.channel_affine(xbar, next.std, next.mean);
  fill_prov(prov, "randstyle", stats, next);
  return {out, sample.label};
}

LabeledImage mix_style(const LabeledImage& a, const LabeledImage& b, double lambda,
                       AugProvenance* prov) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("mix_style: lambda " + std::to_string(lambda) +
                                " outside [0,1]");
  if (a.image.dim(0) != b.image.dim(0))
    throw std::invalid_argument("mix_style: channel mismatch between samples");
  g_invocations.fetch_add(1);
  auto [xbar_a, sa] = decompose_plain(a.image);
  auto [xbar_b, sb] = decompose_plain(b.image);
  (void)xbar_b;
  StyleStats<float> mixed{Tensor<float>(sa.mean.shape()), Tensor<float>(sa.std.shape())};
  const float l = static_cast<float>(lambda);
  for (std::size_t c = 0; c < sa.channels(); ++c) {
    mixed.mean[c] = l * sa.mean[c] + (1.0f - l) * sb.mean[c];
    mixed.std[c] = l * sa.std[c] + (1.0f - l) * sb.std[c];
  }
  Tape<float> tape;
  Tensor<float> out = tape.channel_affine(xbar_a, mixed.std, mixed.mean);
  fill_prov(prov, "mixstyle", sa, mixed);
  return {out, a.label};
}

std::pair<LabeledImage, LabeledImage> cross_style(const LabeledImage& a, const LabeledImage& b,
                                                  AugProvenance* prov_a,
                                                  AugProvenance* prov_b) {
  if (a.image.dim(0) != b.image.dim(0))
    throw std::invalid_argument("cross_style: channel mismatch between samples");
  g_invocations.fetch_add(1);
  auto [xbar_a, sa] = decompose_plain(a.image);
  auto [xbar_b, sb] = decompose_plain(b.image);
  Tape<float> tape;
  Tensor<float> out_a = tape.channel_affine(xbar_a, sb.std, sb.mean);
  Tensor<float> out_b = tape.channel_affine(xbar_b, sa.std, sa.mean);
  fill_prov(prov_a, "crossstyle", sa, sb);
  fill_prov(prov_b, "crossstyle", sb, sa);
  return {{out_a, a.label}, {out_b, b.label}};
}

LabeledImage adv_pixel(const ModelState<float>& model, const LabeledImage& sample, double lr,
                       std::size_t steps, AugProvenance* prov, int ignore_index) {
  if (lr < 0) throw std::invalid_argument("adv_pixel: lr must be >= 0");
  g_invocations.fetch_add(1);
  IntTensor blabel = batched_label(sample.label);
  Tensor<float> px = sample.image.clone();
  for (std::size_t step = 0; step < steps; ++step) {
    px.set_requires_grad(true);
    Tape<float> tape;
    std::vector<Tensor<float>> parts{px};
    Tensor<float> logits = model_forward(
        tape, model, tape.stack(std::span<const Tensor<float>>(parts)), /*frozen=*/true);
    tape.backward(tape.pixelwise_cross_entropy(logits, blabel, ignore_index));
    Tensor<float> next(px.shape());
    for (std::size_t i = 0; i < px.size(); ++i)
      next[i] = px[i] + static_cast<float>(lr) * px.grad()[i];
    px = next;
  }
  if (prov) {
    auto [xb0, s0] = decompose_plain(sample.image);
    auto [xb1, s1] = decompose_plain(px);
    (void)xb0;
    (void)xb1;
    fill_prov(prov, "advpixel", s0, s1);
  }
  return {px, sample.label};
}

std::size_t policy_select(std::size_t num_strategies, std::span<const double> weights,
                          Rng& rng) {
  if (num_strategies == 0) throw std::invalid_argument("policy_select: empty strategy list");
  if (weights.size() != num_strategies)
    throw std::invalid_argument("policy_select: weights do not match strategies");
  double sum = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("policy_select: negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("policy_select: weights must sum to 1");
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t i = 0; i < num_strategies; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return num_strategies - 1;
}

}  // namespace advstyle
