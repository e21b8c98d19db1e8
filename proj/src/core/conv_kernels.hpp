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

#include <algorithm>
#include <cstddef>

#include "core/common.hpp"

namespace advstyle::detail {

struct ConvDims {
  std::size_t n, cin, h, w;
  std::size_t cout, k;
  std::size_t stride, pad;
  std::size_t ho, wo;
};

// Valid output range [lo, hi) along one axis for a given kernel offset, i.e.
// the positions where in_index = out_index*stride - pad + koff stays inside
// [0, in_extent).
inline void valid_out_range(std::size_t out_extent, std::size_t in_extent, std::size_t stride,
                            long off, std::size_t* lo, std::size_t* hi) {
  long l = 0;
  if (off < 0) l = (-off + static_cast<long>(stride) - 1) / static_cast<long>(stride);
  long last_in = static_cast<long>(in_extent) - 1 - off;
  long h = last_in < 0 ? 0 : last_in / static_cast<long>(stride) + 1;
  h = std::min<long>(h, static_cast<long>(out_extent));
  if (h < l) h = l;
  *lo = static_cast<std::size_t>(l);
  *hi = static_cast<std::size_t>(h);
}

// Cross-correlation. Each (n, oc) output plane is owned by one task, so the
// accumulation order per element is fixed regardless of thread count.
template <typename T>
void conv2d_forward(const T* in, const T* weight, const T* bias, T* out, const ConvDims& d) {
  parallel_for(0, d.n * d.cout, 1, [&](std::size_t task_b, std::size_t task_e) {
    for (std::size_t task = task_b; task < task_e; ++task) {
      const std::size_t n = task / d.cout;
      const std::size_t oc = task % d.cout;
      T* op = out + (n * d.cout + oc) * d.ho * d.wo;
      const T bv = bias ? bias[oc] : T(0);
      for (std::size_t i = 0; i < d.ho * d.wo; ++i) op[i] = bv;
      for (std::size_t ic = 0; ic < d.cin; ++ic) {
        const T* ip = in + (n * d.cin + ic) * d.h * d.w;
        const T* wp = weight + ((oc * d.cin + ic) * d.k) * d.k;
        for (std::size_t kh = 0; kh < d.k; ++kh) {
          const long hoff = static_cast<long>(kh) - static_cast<long>(d.pad);
          std::size_t oh_lo, oh_hi;
          valid_out_range(d.ho, d.h, d.stride, hoff, &oh_lo, &oh_hi);
          for (std::size_t kw = 0; kw < d.k; ++kw) {
            const T wv = wp[kh * d.k + kw];
            const long woff = static_cast<long>(kw) - static_cast<long>(d.pad);
            std::size_t ow_lo, ow_hi;
            valid_out_range(d.wo, d.w, d.stride, woff, &ow_lo, &ow_hi);
            if (d.stride == 1) {
              for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                const T* irow = ip + (oh + hoff) * d.w + woff;
                T* orow = op + oh * d.wo;
                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) orow[ow] += wv * irow[ow];
              }
            } else {
              for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                const std::size_t ih = oh * d.stride + hoff;
                T* orow = op + oh * d.wo;
                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow)
                  orow[ow] += wv * ip[ih * d.w + ow * d.stride + woff];
              }
            }
          }
        }
      }
    }
  });
}

// Accumulates into d_in. Each (n, ic) input plane is owned by one task.
template <typename T>
void conv2d_backward_input(const T* grad_out, const T* weight, T* d_in, const ConvDims& d) {
  parallel_for(0, d.n * d.cin, 1, [&](std::size_t task_b, std::size_t task_e) {
    for (std::size_t task = task_b; task < task_e; ++task) {
      const std::size_t n = task / d.cin;
      const std::size_t ic = task % d.cin;
      T* dip = d_in + (n * d.cin + ic) * d.h * d.w;
      for (std::size_t oc = 0; oc < d.cout; ++oc) {
        const T* gp = grad_out + (n * d.cout + oc) * d.ho * d.wo;
        const T* wp = weight + ((oc * d.cin + ic) * d.k) * d.k;
        for (std::size_t kh = 0; kh < d.k; ++kh) {
          const long hoff = static_cast<long>(kh) - static_cast<long>(d.pad);
          std::size_t oh_lo, oh_hi;
          valid_out_range(d.ho, d.h, d.stride, hoff, &oh_lo, &oh_hi);
          for (std::size_t kw = 0; kw < d.k; ++kw) {
            const T wv = wp[kh * d.k + kw];
            const long woff = static_cast<long>(kw) - static_cast<long>(d.pad);
            std::size_t ow_lo, ow_hi;
            valid_out_range(d.wo, d.w, d.stride, woff, &ow_lo, &ow_hi);
            if (d.stride == 1) {
              for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                const T* grow = gp + oh * d.wo;
                T* drow = dip + (oh + hoff) * d.w + woff;
                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) drow[ow] += wv * grow[ow];
              }
            } else {
              for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                const std::size_t ih = oh * d.stride + hoff;
                const T* grow = gp + oh * d.wo;
                for (std::size_t ow = ow_lo; ow < ow_hi; ++ow)
                  dip[ih * d.w + ow * d.stride + woff] += wv * grow[ow];
              }
            }
          }
        }
      }
    }
  });
}

// Accumulates into d_weight. Each oc owns its weight slice; the batch loop
// stays inside so the reduction order is fixed.
template <typename T>
void conv2d_backward_weight(const T* in, const T* grad_out, T* d_weight, const ConvDims& d) {
  parallel_for(0, d.cout, 1, [&](std::size_t oc_b, std::size_t oc_e) {
    for (std::size_t oc = oc_b; oc < oc_e; ++oc) {
      for (std::size_t ic = 0; ic < d.cin; ++ic) {
        T* dwp = d_weight + ((oc * d.cin + ic) * d.k) * d.k;
        for (std::size_t kh = 0; kh < d.k; ++kh) {
          const long hoff = static_cast<long>(kh) - static_cast<long>(d.pad);
          std::size_t oh_lo, oh_hi;
          valid_out_range(d.ho, d.h, d.stride, hoff, &oh_lo, &oh_hi);
          for (std::size_t kw = 0; kw < d.k; ++kw) {
            const long woff = static_cast<long>(kw) - static_cast<long>(d.pad);
            std::size_t ow_lo, ow_hi;
            valid_out_range(d.wo, d.w, d.stride, woff, &ow_lo, &ow_hi);
            T acc = 0;
            for (std::size_t n = 0; n < d.n; ++n) {
              const T* gp = grad_out + (n * d.cout + oc) * d.ho * d.wo;
              const T* ip = in + (n * d.cin + ic) * d.h * d.w;
              for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                const std::size_t ih = oh * d.stride + hoff;
                const T* grow = gp + oh * d.wo;
                if (d.stride == 1) {
                  const T* irow = ip + ih * d.w + woff;
                  for (std::size_t ow = ow_lo; ow < ow_hi; ++ow) acc += grow[ow] * irow[ow];
                } else {
                  for (std::size_t ow = ow_lo; ow < ow_hi; ++ow)
                    acc += grow[ow] * ip[ih * d.w + ow * d.stride + woff];
                }
              }
            }
            dwp[kh * d.k + kw] += acc;
          }
        }
      }
    }
  });
}

template <typename T>
void conv2d_backward_bias(const T* grad_out, T* d_bias, const ConvDims& d) {
  for (std::size_t oc = 0; oc < d.cout; ++oc) {
    T acc = 0;
    for (std::size_t n = 0; n < d.n; ++n) {
      const T* gp = grad_out + (n * d.cout + oc) * d.ho * d.wo;
      for (std::size_t i = 0; i < d.ho * d.wo; ++i) acc += gp[i];
    }
    d_bias[oc] += acc;
  }
}

}  // namespace advstyle::detail
