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

#include "core/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "core/tensor_io.hpp"

namespace advstyle {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ull;    // "init"
constexpr std::uint64_t kBatchStream = 0x62617463ull;   // "batc"
constexpr std::uint64_t kAugStream = 0x61756773ull;     // "augs"
constexpr std::uint64_t kPreStream = 0x70726561ull;     // "prea"
constexpr std::uint64_t kComboStream = 0x636f6d62ull;   // "comb"
constexpr std::uint64_t kPairStream = 0x70616972ull;    // "pair"

std::string iter_dir(std::size_t iter) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%06zu", iter);
  return buf;
}

}  // namespace

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::kNone: return "none";
    case Policy::kAdvStyle: return "advstyle";
    case Policy::kAdvPixel: return "advpixel";
    case Policy::kRandStyle: return "randstyle";
    case Policy::kMixStyle: return "mixstyle";
    case Policy::kCrossStyle: return "crossstyle";
    case Policy::kRandomAdvCombo: return "random_combo";
  }
  return "unknown";
}

Policy parse_policy(const std::string& name) {
  for (Policy p : {Policy::kNone, Policy::kAdvStyle, Policy::kAdvPixel, Policy::kRandStyle,
                   Policy::kMixStyle, Policy::kCrossStyle, Policy::kRandomAdvCombo})
    if (name == policy_name(p)) return p;
  throw std::invalid_argument("unknown policy: " + name);
}

LabeledImage pre_augment(const LabeledImage& sample, const PreAugConfig& cfg, Rng& rng) {
  Tensor<float> img = sample.image.clone();
  IntTensor label = sample.label;
  const std::size_t c = img.dim(0);
  std::size_t h = img.dim(1), w = img.dim(2);

  if (cfg.color_jitter) {
    const float brightness = static_cast<float>(rng.uniform(0.6, 1.4));
    const float contrast = static_cast<float>(rng.uniform(0.6, 1.4));
    double mean = 0;
    for (std::size_t i = 0; i < img.size(); ++i) mean += img[i];
    mean /= static_cast<double>(img.size());
    const float m = static_cast<float>(mean);
    for (std::size_t i = 0; i < img.size(); ++i) {
      float v = img[i] * brightness;
      v = (v - m) * contrast + m;
      img[i] = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
    }
  }

  if (cfg.gaussian_blur) {
    const std::size_t k = rng.index(2) == 0 ? 3 : 5;
    const double sigma = rng.uniform(0.1, 1.0);
    const long r = static_cast<long>(k / 2);
    std::vector<float> kern(k);
    for (long i = -r; i <= r; ++i)
      kern[static_cast<std::size_t>(i + r)] =
          static_cast<float>(std::exp(-0.5 * (i * i) / (sigma * sigma)));
    // separable passes, kernel renormalized at the borders
    Tensor<float> tmp(img.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
      const float* src = img.data() + ch * h * w;
      float* dst = tmp.data() + ch * h * w;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          float acc = 0, norm = 0;
          for (long i = -r; i <= r; ++i) {
            const long xx = static_cast<long>(x) + i;
            if (xx < 0 || xx >= static_cast<long>(w)) continue;
            const float kv = kern[static_cast<std::size_t>(i + r)];
            acc += kv * src[y * w + static_cast<std::size_t>(xx)];
            norm += kv;
          }
          dst[y * w + x] = acc / norm;
        }
      const float* src2 = tmp.data() + ch * h * w;
      float* dst2 = img.data() + ch * h * w;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          float acc = 0, norm = 0;
          for (long i = -r; i <= r; ++i) {
            const long yy = static_cast<long>(y) + i;
            if (yy < 0 || yy >= static_cast<long>(h)) continue;
            const float kv = kern[static_cast<std::size_t>(i + r)];
            acc += kv * src2[static_cast<std::size_t>(yy) * w + x];
            norm += kv;
          }
          dst2[y * w + x] = acc / norm;
        }
    }
  }

  if (cfg.random_flip && rng.uniform() < 0.5) {
    Tensor<float> flipped(img.shape());
    IntTensor flabel({h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          flipped[(ch * h + y) * w + x] = img[(ch * h + y) * w + (w - 1 - x)];
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) flabel[y * w + x] = label[y * w + (w - 1 - x)];
    img = flipped;
    label = flabel;
  }

  if (cfg.crop > 0 && cfg.crop < std::min(h, w)) {
    const std::size_t ch_size = cfg.crop;
    const std::size_t top = rng.index(h - ch_size + 1);
    const std::size_t left = rng.index(w - ch_size + 1);
    Tensor<float> cropped({c, ch_size, ch_size});
    IntTensor clabel({ch_size, ch_size});
    for (std::size_t chn = 0; chn < c; ++chn)
      for (std::size_t y = 0; y < ch_size; ++y)
        for (std::size_t x = 0; x < ch_size; ++x)
          cropped[(chn * ch_size + y) * ch_size + x] = img[(chn * h + top + y) * w + left + x];
    for (std::size_t y = 0; y < ch_size; ++y)
      for (std::size_t x = 0; x < ch_size; ++x)
        clabel[y * ch_size + x] = label[(top + y) * w + left + x];
    img = cropped;
    label = clabel;
  }

  return {img, label};
}

void TrainConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("train: max_iter must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (lr0 <= 0) throw std::invalid_argument("train: lr0 must be > 0");
  if (poly_power <= 0) throw std::invalid_argument("train: poly_power must be > 0");
  if (momentum < 0 || momentum >= 1) throw std::invalid_argument("train: momentum outside [0,1)");
  if (weight_decay < 0) throw std::invalid_argument("train: weight_decay must be >= 0");
  adv.validate();
  model.validate();
}

double poly_lr(std::size_t iter, double lr0, double power, std::size_t max_iter) {
  if (iter > max_iter)
    throw std::invalid_argument("poly_lr: iter " + std::to_string(iter) + " past max_iter " +
                                std::to_string(max_iter));
  const double frac = 1.0 - static_cast<double>(iter) / static_cast<double>(max_iter);
  return lr0 * std::pow(frac, power);
}

void sgd_step(ModelState<float>& model, double lr, double momentum, double weight_decay) {
  auto params = model.parameters();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<float>& theta = params[pi];
    Tensor<float>& vel = model.momentum[pi];
    const bool is_weight = (pi % 2 == 0);  // weights precede biases per layer
    const float wd = is_weight ? static_cast<float>(weight_decay) : 0.f;
    const float m = static_cast<float>(momentum);
    const float step = static_cast<float>(lr);
    const std::vector<float>* grad = nullptr;
    if (theta.grad_present()) grad = &theta.grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const float g = (grad ? (*grad)[i] : 0.f) + wd * theta[i];
      vel[i] = m * vel[i] + g;
      theta[i] -= step * vel[i];
      if (!std::isfinite(theta[i]))
        throw std::runtime_error("sgd: non-finite parameter after update (param " +
                                 std::to_string(pi) + ", element " + std::to_string(i) + ")");
    }
  }
}

void write_train_log_csv(const std::string& path, const TrainLog& log) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write train log: " + path);
  os << "iter,lr,loss_clean,loss_adv,mu_shift_l2,sigma_shift_l2\n";
  char buf[256];
  for (const auto& r : log.records) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.iter, r.lr,
                  r.loss_clean, r.loss_adv, r.mu_shift_l2, r.sigma_shift_l2);
    os << buf;
  }
}

namespace {

double stats_shift_l2(const std::vector<float>& before, const std::vector<float>& after) {
  double acc = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const double d = static_cast<double>(after[i]) - static_cast<double>(before[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& source, const std::string& out_dir) {
  cfg.validate();
  if (source.empty()) throw std::invalid_argument("train: dataset is empty");
  const std::size_t checkpoint_every =
      cfg.checkpoint_every > 0 ? cfg.checkpoint_every : std::max<std::size_t>(1, cfg.max_iter / 10);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir + "/checkpoints");

  TrainResult result;
  result.model = build_model<float>(cfg.model, mix_seed(cfg.seed, kInitStream));
  ModelState<float>& model = result.model;
  Rng batch_rng(mix_seed(cfg.seed, kBatchStream));
  const std::size_t b = cfg.batch_size;
  const std::size_t harvest_stride =
      cfg.collect_augmented_max > 0
          ? std::max<std::size_t>(1, cfg.max_iter / cfg.collect_augmented_max)
          : 0;

  std::vector<Tensor<float>> last_good;
  for (const auto& p : model.parameters()) last_good.push_back(p.clone());

  for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
    const double lr = poly_lr(iter, cfg.lr0, cfg.poly_power, cfg.max_iter);

    std::vector<LabeledImage> batch(b);
    for (std::size_t i = 0; i < b; ++i) batch[i] = source[batch_rng.index(source.size())];
    if (cfg.preaug.any()) {
      for (std::size_t i = 0; i < b; ++i) {
        Rng rng(mix_seed(cfg.seed, kPreStream, iter * b + i));
        batch[i] = pre_augment(batch[i], cfg.preaug, rng);
      }
    }

    // Stage 1: build the augmented batch against the frozen parameters.
    Policy active = cfg.policy;
    if (active == Policy::kRandomAdvCombo) {
      Rng combo(mix_seed(cfg.seed, kComboStream, iter));
      const double w[2] = {0.5, 0.5};
      active = policy_select(2, std::span<const double>(w, 2), combo) == 0 ? Policy::kAdvStyle
                                                                           : Policy::kAdvPixel;
    }
    std::vector<LabeledImage> augmented(b);
    std::vector<AugProvenance> prov(b);
    double mu_shift = 0, sigma_shift = 0;
    if (active != Policy::kNone) {
      if (active == Policy::kCrossStyle) {
        // swap styles within consecutive pairs of a seeded shuffle
        Rng pair_rng(mix_seed(cfg.seed, kPairStream, iter));
        std::vector<std::size_t> order(b);
        for (std::size_t i = 0; i < b; ++i) order[i] = i;
        for (std::size_t i = b; i > 1; --i) std::swap(order[i - 1], order[pair_rng.index(i)]);
        for (std::size_t p = 0; p + 1 < b; p += 2) {
          const std::size_t i = order[p], j = order[p + 1];
          auto [ai, aj] = cross_style(batch[i], batch[j], &prov[i], &prov[j]);
          augmented[i] = ai;
          augmented[j] = aj;
        }
        if (b % 2 == 1) {
          const std::size_t i = order[b - 1], j = order[0];
          augmented[i] = cross_style(batch[i], batch[j], &prov[i], nullptr).first;
        }
      } else {
        parallel_for(0, b, 1, [&](std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i) {
            const std::uint64_t aug_seed = mix_seed(cfg.seed, kAugStream, iter * b + i);
            switch (active) {
              case Policy::kAdvStyle: {
                AdvConfig adv = cfg.adv;
                augmented[i] =
                    adv_style_augment(model, batch[i], adv, &prov[i], cfg.ignore_index);
                break;
              }
              case Policy::kAdvPixel:
                augmented[i] = adv_pixel(model, batch[i], cfg.pixel_lr, cfg.pixel_steps,
                                         &prov[i], cfg.ignore_index);
                break;
              case Policy::kRandStyle:
                augmented[i] = rand_style(batch[i], cfg.rand_noise_std, aug_seed, &prov[i]);
                break;
              case Policy::kMixStyle: {
                Rng rng(aug_seed);
                std::size_t j = rng.index(b);
                if (b > 1 && j == i) j = (j + 1) % b;
                const double lambda =
                    cfg.mix_lambda >= 0 ? cfg.mix_lambda : rng.beta(0.1, 0.1);
                augmented[i] = mix_style(batch[i], batch[j], lambda, &prov[i]);
                break;
              }
              default:
                throw std::logic_error("train: unhandled augmentation policy");
            }
          }
        });
      }
      std::size_t with_stats = 0;
      for (const auto& p : prov) {
        if (p.mu_before.empty()) continue;
        mu_shift += stats_shift_l2(p.mu_before, p.mu_after);
        sigma_shift += stats_shift_l2(p.sd_before, p.sd_after);
        ++with_stats;
      }
      if (with_stats > 0) {
        mu_shift /= static_cast<double>(with_stats);
        sigma_shift /= static_cast<double>(with_stats);
      }
      if (harvest_stride > 0 && iter % harvest_stride == 0 &&
          result.augmented.size() < cfg.collect_augmented_max)
        result.augmented.push_back(augmented[0]);
    }

    // Stage 2: one SGD step on the summed loss of both batches.
    IntTensor labels({b, batch[0].label.dim(0), batch[0].label.dim(1)});
    for (std::size_t i = 0; i < b; ++i)
      std::copy(batch[i].label.data(), batch[i].label.data() + batch[i].label.size(),
                labels.data() + i * batch[i].label.size());

    Tape<float> tape;
    std::vector<Tensor<float>> clean_imgs, adv_imgs;
    for (std::size_t i = 0; i < b; ++i) clean_imgs.push_back(batch[i].image);
    Tensor<float> loss_clean = seg_loss(
        tape, model_forward(tape, model, tape.stack(std::span<const Tensor<float>>(clean_imgs))),
        labels, cfg.ignore_index);
    Tensor<float> total = loss_clean;
    double loss_adv_v = 0;
    if (active != Policy::kNone) {
      for (std::size_t i = 0; i < b; ++i) adv_imgs.push_back(augmented[i].image.detached());
      Tensor<float> loss_adv = seg_loss(
          tape, model_forward(tape, model, tape.stack(std::span<const Tensor<float>>(adv_imgs))),
          labels, cfg.ignore_index);
      loss_adv_v = loss_adv[0];
      total = tape.add(loss_clean, loss_adv);
    }

    if (!std::isfinite(static_cast<double>(total[0]))) {
      if (!out_dir.empty()) {
        ModelState<float> snapshot = build_model<float>(cfg.model, 0);
        auto snap_params = snapshot.parameters();
        for (std::size_t pi = 0; pi < snap_params.size(); ++pi)
          std::copy(last_good[pi].data(), last_good[pi].data() + last_good[pi].size(),
                    snap_params[pi].data());
        save_checkpoint(out_dir + "/checkpoints/abort_last_good", snapshot);
      }
      throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(iter) +
                               "; last good parameters saved");
    }

    tape.backward(total);
    sgd_step(model, lr, cfg.momentum, cfg.weight_decay);
    model.zero_param_grads();

    {
      auto params = model.parameters();
      for (std::size_t pi = 0; pi < params.size(); ++pi)
        std::copy(params[pi].data(), params[pi].data() + params[pi].size(),
                  last_good[pi].data());
    }

    result.log.records.push_back({iter, lr, static_cast<double>(loss_clean[0]), loss_adv_v,
                                  mu_shift, sigma_shift});

    if (!out_dir.empty() && (iter + 1) % checkpoint_every == 0 && iter + 1 < cfg.max_iter)
      save_checkpoint(out_dir + "/checkpoints/" + iter_dir(iter + 1), model);
  }

  if (!out_dir.empty()) {
    save_checkpoint(out_dir + "/checkpoint_final", model);
    write_train_log_csv(out_dir + "/train_log.csv", result.log);
  }
  return result;
}

}  // namespace advstyle
