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
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core/color.hpp"
#include "core/common.hpp"
#include "core/conv_kernels.hpp"
#include "core/tensor.hpp"

namespace advstyle {

namespace detail {

template <typename T>
inline const std::vector<T>* grad_if_present(const Tensor<T>& t) {
  auto cell = t.grad_cell();
  return cell->present ? &cell->value : nullptr;
}

template <typename T>
inline std::vector<T>& grad_accum(const Tensor<T>& t) {
  auto cell = t.grad_cell();
  if (!cell->present) {
    cell->value.assign(t.size(), T(0));
    cell->present = true;
  }
  return cell->value;
}

}  // namespace detail

/// Reverse-mode tape over Tensor<T>. Each op executes eagerly and, when any
/// input requires a gradient, records its adjoint. backward() replays the
/// recorded ops in reverse, accumulating into the gradient cells of every
/// requires-grad tensor it reaches. The tape is single use: it belongs to one
/// forward pass and errors on a second backward.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t node_count() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  void backward(const Tensor<T>& loss) {
    if (!loss.is_scalar())
      throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                  shape_str(loss.shape()));
    if (consumed_)
      throw std::runtime_error("backward: graph already consumed; run a new forward pass");
    if (!loss.requires_grad())
      throw std::runtime_error("backward: loss does not require grad (no live graph)");
    consumed_ = true;
    detail::grad_accum(loss)[0] += T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  }

  // ---- elementwise arithmetic -------------------------------------------
  // b may be same-shape, a scalar tensor, or a per-channel vector [C]
  // broadcast over a [C,H,W] input.

  Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        "add", a, b, [](T x, T y) { return x + y; },
        [](T, T, T g) { return g; }, [](T, T, T g) { return g; });
  }

  Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        "sub", a, b, [](T x, T y) { return x - y; },
        [](T, T, T g) { return g; }, [](T, T, T g) { return -g; });
  }

  Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        "mul", a, b, [](T x, T y) { return x * y; },
        [](T, T y, T g) { return g * y; }, [](T x, T, T g) { return g * x; });
  }

  Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        "div", a, b, [](T x, T y) { return x / y; },
        [](T, T y, T g) { return g / y; },
        [](T x, T y, T g) { return -g * x / (y * y); });
  }

  Tensor<T> add_scalar(const Tensor<T>& a, T s) {
    return unary_affine(a, T(1), s);
  }

  Tensor<T> scale(const Tensor<T>& a, T s) { return unary_affine(a, s, T(0)); }

  Tensor<T> neg(const Tensor<T>& a) { return unary_affine(a, T(-1), T(0)); }

  Tensor<T> div_scalar(const Tensor<T>& a, T s) {
    if (s == T(0)) throw std::invalid_argument("div_scalar: division by zero");
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / s;
    if (a.requires_grad()) {
      out.set_requires_grad(true);
      record([a, out, s]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& da = detail::grad_accum(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += (*g)[i] / s;
      });
    }
    return out;
  }

  Tensor<T> sum(const Tensor<T>& a) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]);
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc));
    if (a.requires_grad()) {
      out.set_requires_grad(true);
      record([a, out]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& da = detail::grad_accum(a);
        const T gv = (*g)[0];
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += gv;
      });
    }
    return out;
  }

  Tensor<T> relu(const Tensor<T>& a) {
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > T(0) ? a[i] : T(0);
    if (a.requires_grad()) {
      out.set_requires_grad(true);
      record([a, out]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& da = detail::grad_accum(a);
        for (std::size_t i = 0; i < da.size(); ++i)
          if (a[i] > T(0)) da[i] += (*g)[i];
      });
    }
    return out;
  }

  // ---- convolution -------------------------------------------------------

  Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                   std::size_t stride, std::size_t pad) {
    if (input.rank() != 4)
      throw std::invalid_argument("conv2d: input must be [N,C,H,W], got " +
                                  shape_str(input.shape()));
    if (weight.rank() != 4)
      throw std::invalid_argument("conv2d: weight must be [Cout,Cin,k,k], got " +
                                  shape_str(weight.shape()));
    detail::ConvDims d;
    d.n = input.dim(0);
    d.cin = input.dim(1);
    d.h = input.dim(2);
    d.w = input.dim(3);
    d.cout = weight.dim(0);
    d.k = weight.dim(2);
    d.stride = stride;
    d.pad = pad;
    if (weight.dim(1) != d.cin)
      throw std::invalid_argument("conv2d: weight expects " + std::to_string(weight.dim(1)) +
                                  " input channels, input has " + std::to_string(d.cin));
    if (weight.dim(3) != d.k || d.k % 2 == 0)
      throw std::invalid_argument("conv2d: kernel must be square with odd size, got " +
                                  shape_str(weight.shape()));
    if (bias.size() != d.cout)
      throw std::invalid_argument("conv2d: bias size " + std::to_string(bias.size()) +
                                  " != output channels " + std::to_string(d.cout));
    if (stride == 0) throw std::invalid_argument("conv2d: stride must be >= 1");
    const std::size_t span_h = d.h + 2 * pad;
    const std::size_t span_w = d.w + 2 * pad;
    if (span_h < d.k || span_w < d.k || (span_h - d.k) % stride != 0 ||
        (span_w - d.k) % stride != 0)
      throw std::invalid_argument(
          "conv2d: non-integral output size for input " + shape_str(input.shape()) +
          ", kernel " + std::to_string(d.k) + ", stride " + std::to_string(stride) +
          ", padding " + std::to_string(pad));
    d.ho = (span_h - d.k) / stride + 1;
    d.wo = (span_w - d.k) / stride + 1;

    Tensor<T> out({d.n, d.cout, d.ho, d.wo});
    detail::conv2d_forward(input.data(), weight.data(), bias.data(), out.data(), d);

    if (input.requires_grad() || weight.requires_grad() || bias.requires_grad()) {
      out.set_requires_grad(true);
      record([input, weight, bias, out, d]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        if (input.requires_grad())
          detail::conv2d_backward_input(g->data(), weight.data(),
                                        detail::grad_accum(input).data(), d);
        if (weight.requires_grad())
          detail::conv2d_backward_weight(input.data(), g->data(),
                                         detail::grad_accum(weight).data(), d);
        if (bias.requires_grad())
          detail::conv2d_backward_bias(g->data(), detail::grad_accum(bias).data(), d);
      });
    }
    return out;
  }

  // ---- style primitives --------------------------------------------------

  /// Population mean and standard deviation per channel of a [C,H,W] tensor.
  std::pair<Tensor<T>, Tensor<T>> channel_moments(const Tensor<T>& x) {
    if (x.rank() != 3)
      throw std::invalid_argument("channel_moments: expected [C,H,W], got " +
                                  shape_str(x.shape()));
    const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
    if (hw == 0) throw std::invalid_argument("channel_moments: empty spatial extent");
    Tensor<T> mean({c}), stdev({c});
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* p = x.data() + ch * hw;
      double m = 0;
      for (std::size_t i = 0; i < hw; ++i) m += static_cast<double>(p[i]);
      m /= static_cast<double>(hw);
      double v = 0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double dlt = static_cast<double>(p[i]) - m;
        v += dlt * dlt;
      }
      v /= static_cast<double>(hw);
      mean[ch] = static_cast<T>(m);
      stdev[ch] = static_cast<T>(std::sqrt(v));
    }
    if (x.requires_grad()) {
      mean.set_requires_grad(true);
      stdev.set_requires_grad(true);
      record([x, mean, stdev, c, hw]() {
        const auto* gm = detail::grad_if_present(mean);
        const auto* gs = detail::grad_if_present(stdev);
        if (!gm && !gs) return;
        auto& dx = detail::grad_accum(x);
        const T inv = T(1) / static_cast<T>(hw);
        for (std::size_t ch = 0; ch < c; ++ch) {
          const T* p = x.data() + ch * hw;
          T* d = dx.data() + ch * hw;
          if (gm) {
            const T gmv = (*gm)[ch] * inv;
            for (std::size_t i = 0; i < hw; ++i) d[i] += gmv;
          }
          if (gs && stdev[ch] > T(0)) {
            const T gsv = (*gs)[ch] * inv / stdev[ch];
            const T m = mean[ch];
            for (std::size_t i = 0; i < hw; ++i) d[i] += gsv * (p[i] - m);
          }
        }
      });
    }
    return {mean, stdev};
  }

  /// out[c,h,w] = x[c,h,w] * scale[c] + shift[c].
  Tensor<T> channel_affine(const Tensor<T>& x, const Tensor<T>& scale_v,
                           const Tensor<T>& shift_v) {
    if (x.rank() != 3)
      throw std::invalid_argument("channel_affine: expected [C,H,W], got " +
                                  shape_str(x.shape()));
    const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
    if (scale_v.size() != c || shift_v.size() != c)
      throw std::invalid_argument("channel_affine: channel mismatch, image has " +
                                  std::to_string(c) + " channels, scale " +
                                  std::to_string(scale_v.size()) + ", shift " +
                                  std::to_string(shift_v.size()));
    Tensor<T> out(x.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T s = scale_v[ch], b = shift_v[ch];
      const T* p = x.data() + ch * hw;
      T* o = out.data() + ch * hw;
      for (std::size_t i = 0; i < hw; ++i) o[i] = p[i] * s + b;
    }
    if (x.requires_grad() || scale_v.requires_grad() || shift_v.requires_grad()) {
      out.set_requires_grad(true);
      record([x, scale_v, shift_v, out, c, hw]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        if (x.requires_grad()) {
          auto& dx = detail::grad_accum(x);
          for (std::size_t ch = 0; ch < c; ++ch) {
            const T s = scale_v[ch];
            const T* gp = g->data() + ch * hw;
            T* d = dx.data() + ch * hw;
            for (std::size_t i = 0; i < hw; ++i) d[i] += gp[i] * s;
          }
        }
        if (scale_v.requires_grad()) {
          auto& ds = detail::grad_accum(scale_v);
          for (std::size_t ch = 0; ch < c; ++ch) {
            const T* gp = g->data() + ch * hw;
            const T* p = x.data() + ch * hw;
            T acc = 0;
            for (std::size_t i = 0; i < hw; ++i) acc += gp[i] * p[i];
            ds[ch] += acc;
          }
        }
        if (shift_v.requires_grad()) {
          auto& db = detail::grad_accum(shift_v);
          for (std::size_t ch = 0; ch < c; ++ch) {
            const T* gp = g->data() + ch * hw;
            T acc = 0;
            for (std::size_t i = 0; i < hw; ++i) acc += gp[i];
            db[ch] += acc;
          }
        }
      });
    }
    return out;
  }

  // ---- loss ----------------------------------------------------------------

  /// Mean over non-ignored pixels of -log softmax(logits)[label], stabilized
  /// by max subtraction. logits [N,K,H,W], labels [N,H,W].
  Tensor<T> pixelwise_cross_entropy(const Tensor<T>& logits, const IntTensor& labels,
                                    int ignore_index) {
    if (logits.rank() != 4)
      throw std::invalid_argument("cross_entropy: logits must be [N,K,H,W], got " +
                                  shape_str(logits.shape()));
    if (labels.rank() != 3 || labels.dim(0) != logits.dim(0) ||
        labels.dim(1) != logits.dim(2) || labels.dim(2) != logits.dim(3))
      throw std::invalid_argument("cross_entropy: labels shape " + shape_str(labels.shape()) +
                                  " does not match logits " + shape_str(logits.shape()));
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    const std::size_t hw = logits.dim(2) * logits.dim(3);
    std::size_t count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::int32_t l = labels[i];
      if (l == ignore_index) continue;
      if (l < 0 || static_cast<std::size_t>(l) >= k)
        throw std::invalid_argument("cross_entropy: label " + std::to_string(l) +
                                    " out of range [0," + std::to_string(k) + ")");
      ++count;
    }
    double total = 0;
    for (std::size_t ni = 0; ni < n; ++ni) {
      const T* lp = logits.data() + ni * k * hw;
      const std::int32_t* lb = labels.data() + ni * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const std::int32_t l = lb[i];
        if (l == ignore_index) continue;
        T mx = lp[i];
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, lp[c * hw + i]);
        double se = 0;
        for (std::size_t c = 0; c < k; ++c)
          se += std::exp(static_cast<double>(lp[c * hw + i] - mx));
        total += std::log(se) + static_cast<double>(mx) -
                 static_cast<double>(lp[static_cast<std::size_t>(l) * hw + i]);
      }
    }
    Tensor<T> out =
        Tensor<T>::scalar(count > 0 ? static_cast<T>(total / static_cast<double>(count)) : T(0));
    if (logits.requires_grad() && count > 0) {
      out.set_requires_grad(true);
      record([logits, labels, out, n, k, hw, count, ignore_index]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        const T gv = (*g)[0] / static_cast<T>(count);
        auto& dl = detail::grad_accum(logits);
        parallel_for(0, n, 1, [&](std::size_t nb, std::size_t ne) {
          for (std::size_t ni = nb; ni < ne; ++ni) {
            const T* lp = logits.data() + ni * k * hw;
            T* dp = dl.data() + ni * k * hw;
            const std::int32_t* lb = labels.data() + ni * hw;
            for (std::size_t i = 0; i < hw; ++i) {
              const std::int32_t l = lb[i];
              if (l == ignore_index) continue;
              T mx = lp[i];
              for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, lp[c * hw + i]);
              double se = 0;
              for (std::size_t c = 0; c < k; ++c)
                se += std::exp(static_cast<double>(lp[c * hw + i] - mx));
              for (std::size_t c = 0; c < k; ++c) {
                const double p = std::exp(static_cast<double>(lp[c * hw + i] - mx)) / se;
                const double onehot = (static_cast<std::size_t>(l) == c) ? 1.0 : 0.0;
                dp[c * hw + i] += gv * static_cast<T>(p - onehot);
              }
            }
          }
        });
      });
    }
    return out;
  }

  // ---- shape ops -------------------------------------------------------------

  Tensor<T> stack(std::span<const Tensor<T>> parts) {
    if (parts.empty()) throw std::invalid_argument("stack: no tensors given");
    const auto& s0 = parts[0].shape();
    for (const auto& p : parts)
      if (p.shape() != s0)
        throw std::invalid_argument("stack: mismatched shapes " + shape_str(s0) + " vs " +
                                    shape_str(p.shape()));
    std::vector<std::size_t> oshape;
    oshape.push_back(parts.size());
    oshape.insert(oshape.end(), s0.begin(), s0.end());
    Tensor<T> out(std::move(oshape));
    const std::size_t block = parts[0].size();
    bool need = false;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::copy(parts[i].data(), parts[i].data() + block, out.data() + i * block);
      need = need || parts[i].requires_grad();
    }
    if (need) {
      out.set_requires_grad(true);
      std::vector<Tensor<T>> held(parts.begin(), parts.end());
      record([held = std::move(held), out, block]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        for (std::size_t i = 0; i < held.size(); ++i) {
          if (!held[i].requires_grad()) continue;
          auto& d = detail::grad_accum(held[i]);
          const T* gp = g->data() + i * block;
          for (std::size_t j = 0; j < block; ++j) d[j] += gp[j];
        }
      });
    }
    return out;
  }

  Tensor<T> select(const Tensor<T>& x, std::size_t index) {
    if (x.rank() < 1 || index >= x.dim(0))
      throw std::invalid_argument("select: index " + std::to_string(index) +
                                  " out of range for shape " + shape_str(x.shape()));
    std::vector<std::size_t> oshape(x.shape().begin() + 1, x.shape().end());
    Tensor<T> out(std::move(oshape));
    const std::size_t block = out.size();
    std::copy(x.data() + index * block, x.data() + (index + 1) * block, out.data());
    if (x.requires_grad()) {
      out.set_requires_grad(true);
      record([x, out, index, block]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& d = detail::grad_accum(x);
        T* dp = d.data() + index * block;
        for (std::size_t j = 0; j < block; ++j) dp[j] += (*g)[j];
      });
    }
    return out;
  }

  Tensor<T> crop(const Tensor<T>& x, std::size_t r0, std::size_t c0, std::size_t h,
                 std::size_t w) {
    if (x.rank() != 3)
      throw std::invalid_argument("crop: expected [C,H,W], got " + shape_str(x.shape()));
    const std::size_t c = x.dim(0), hh = x.dim(1), ww = x.dim(2);
    if (h == 0 || w == 0 || r0 + h > hh || c0 + w > ww)
      throw std::invalid_argument("crop: window out of bounds for " + shape_str(x.shape()));
    Tensor<T> out({c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t r = 0; r < h; ++r)
        std::copy(x.data() + (ch * hh + r0 + r) * ww + c0,
                  x.data() + (ch * hh + r0 + r) * ww + c0 + w,
                  out.data() + (ch * h + r) * w);
    if (x.requires_grad()) {
      out.set_requires_grad(true);
      record([x, out, r0, c0, c, h, w, hh, ww]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& d = detail::grad_accum(x);
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t r = 0; r < h; ++r) {
            const T* gp = g->data() + (ch * h + r) * w;
            T* dp = d.data() + (ch * hh + r0 + r) * ww + c0;
            for (std::size_t j = 0; j < w; ++j) dp[j] += gp[j];
          }
      });
    }
    return out;
  }

  /// Places a [C,h,w] patch into a zero [C,H,W] canvas at (r0, c0).
  Tensor<T> embed(const Tensor<T>& patch, std::size_t H, std::size_t W, std::size_t r0,
                  std::size_t c0) {
    if (patch.rank() != 3)
      throw std::invalid_argument("embed: expected [C,h,w], got " + shape_str(patch.shape()));
    const std::size_t c = patch.dim(0), h = patch.dim(1), w = patch.dim(2);
    if (r0 + h > H || c0 + w > W)
      throw std::invalid_argument("embed: patch " + shape_str(patch.shape()) +
                                  " does not fit canvas at requested offset");
    Tensor<T> out({c, H, W});
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t r = 0; r < h; ++r)
        std::copy(patch.data() + (ch * h + r) * w, patch.data() + (ch * h + r) * w + w,
                  out.data() + (ch * H + r0 + r) * W + c0);
    if (patch.requires_grad()) {
      out.set_requires_grad(true);
      record([patch, out, r0, c0, c, h, w, H, W]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& d = detail::grad_accum(patch);
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t r = 0; r < h; ++r) {
            const T* gp = g->data() + (ch * H + r0 + r) * W + c0;
            T* dp = d.data() + (ch * h + r) * w;
            for (std::size_t j = 0; j < w; ++j) dp[j] += gp[j];
          }
      });
    }
    return out;
  }

  // ---- color space ----------------------------------------------------------

  Tensor<T> rgb_to_lab(const Tensor<T>& x) { return color_op(x, /*to_lab=*/true); }
  Tensor<T> lab_to_rgb(const Tensor<T>& x) { return color_op(x, /*to_lab=*/false); }

 private:
  void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

  Tensor<T> unary_affine(const Tensor<T>& a, T m, T c) {
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * m + c;
    if (a.requires_grad()) {
      out.set_requires_grad(true);
      record([a, out, m]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& da = detail::grad_accum(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += (*g)[i] * m;
      });
    }
    return out;
  }

  enum class BinaryMode { kSame, kScalar, kChannel };

  static BinaryMode binary_mode(const char* name, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() == b.shape()) return BinaryMode::kSame;
    if (b.is_scalar()) return BinaryMode::kScalar;
    if (a.rank() == 3 && b.rank() == 1 && b.dim(0) == a.dim(0)) return BinaryMode::kChannel;
    throw std::invalid_argument(std::string(name) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  }

  template <typename F, typename Da, typename Db>
  Tensor<T> binary_op(const char* name, const Tensor<T>& a, const Tensor<T>& b, F f, Da dfda,
                      Db dfdb) {
    const BinaryMode mode = binary_mode(name, a, b);
    const std::size_t hw =
        mode == BinaryMode::kChannel ? a.dim(1) * a.dim(2) : (mode == BinaryMode::kScalar ? a.size() : 1);
    auto bindex = [mode, hw](std::size_t i) -> std::size_t {
      switch (mode) {
        case BinaryMode::kSame: return i;
        case BinaryMode::kScalar: return 0;
        case BinaryMode::kChannel: return i / hw;
      }
      return 0;
    };
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[bindex(i)]);
    if (a.requires_grad() || b.requires_grad()) {
      out.set_requires_grad(true);
      record([a, b, out, bindex, dfda, dfdb]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        if (a.requires_grad()) {
          auto& da = detail::grad_accum(a);
          for (std::size_t i = 0; i < da.size(); ++i)
            da[i] += dfda(a[i], b[bindex(i)], (*g)[i]);
        }
        if (b.requires_grad()) {
          auto& db = detail::grad_accum(b);
          for (std::size_t i = 0; i < a.size(); ++i)
            db[bindex(i)] += dfdb(a[i], b[bindex(i)], (*g)[i]);
        }
      });
    }
    return out;
  }

  Tensor<T> color_op(const Tensor<T>& x, bool to_lab) {
    const char* name = to_lab ? "rgb_to_lab" : "lab_to_rgb";
    if (x.rank() != 3 || x.dim(0) != 3)
      throw std::invalid_argument(std::string(name) + ": expected 3 channels, got " +
                                  shape_str(x.shape()));
    const std::size_t hw = x.dim(1) * x.dim(2);
    Tensor<T> out(x.shape());
    for (std::size_t i = 0; i < hw; ++i) {
      double o0, o1, o2;
      if (to_lab)
        detail::rgb_to_lab_pixel(x[i], x[hw + i], x[2 * hw + i], &o0, &o1, &o2);
      else
        detail::lab_to_rgb_pixel(x[i], x[hw + i], x[2 * hw + i], &o0, &o1, &o2);
      out[i] = static_cast<T>(o0);
      out[hw + i] = static_cast<T>(o1);
      out[2 * hw + i] = static_cast<T>(o2);
    }
    if (x.requires_grad()) {
      out.set_requires_grad(true);
      record([x, out, hw, to_lab]() {
        const auto* g = detail::grad_if_present(out);
        if (!g) return;
        auto& dx = detail::grad_accum(x);
        for (std::size_t i = 0; i < hw; ++i) {
          double d0 = 0, d1 = 0, d2 = 0;
          if (to_lab)
            detail::rgb_to_lab_backward_pixel(x[i], x[hw + i], x[2 * hw + i], (*g)[i],
                                              (*g)[hw + i], (*g)[2 * hw + i], &d0, &d1, &d2);
          else
            detail::lab_to_rgb_backward_pixel(x[i], x[hw + i], x[2 * hw + i], (*g)[i],
                                              (*g)[hw + i], (*g)[2 * hw + i], &d0, &d1, &d2);
          dx[i] += static_cast<T>(d0);
          dx[hw + i] += static_cast<T>(d1);
          dx[2 * hw + i] += static_cast<T>(d2);
        }
      });
    }
    return out;
  }

  std::vector<std::function<void()>> nodes_;
  bool consumed_ = false;
};

}  // namespace advstyle
