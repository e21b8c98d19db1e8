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

namespace advstyle::detail {

// sRGB <-> CIE L*a*b* under D65, per-pixel scalar kernels plus analytic
// partial derivatives for the backward pass. Out-of-range inputs (possible
// for adversarially styled images) are handled by letting the linear branch
// of each piecewise curve extend below its threshold, which keeps every
// function defined and monotone on all of R.

inline constexpr double kSrgbToXyz[9] = {
    0.4124564, 0.3575761, 0.1804375,  //
    0.2126729, 0.7151522, 0.0721750,  //
    0.0193339, 0.1191920, 0.9503041,
};

inline constexpr double kXyzToSrgb[9] = {
    3.2404542,  -1.5371385, -0.4985314,  //
    -0.9692660, 1.8760108,  0.0415560,   //
    0.0556434,  -0.2040259, 1.0572252,
};

inline constexpr double kWhiteX = 0.95047;
inline constexpr double kWhiteY = 1.0;
inline constexpr double kWhiteZ = 1.08883;

inline constexpr double kLabDelta = 6.0 / 29.0;
inline constexpr double kLabDelta2 = kLabDelta * kLabDelta;
inline constexpr double kLabDelta3 = kLabDelta * kLabDelta * kLabDelta;

inline double srgb_linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double srgb_linearize_deriv(double c) {
  return c <= 0.04045 ? 1.0 / 12.92 : (2.4 / 1.055) * std::pow((c + 0.055) / 1.055, 1.4);
}

inline double srgb_delinearize(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

inline double srgb_delinearize_deriv(double c) {
  return c <= 0.0031308 ? 12.92 : (1.055 / 2.4) * std::pow(c, 1.0 / 2.4 - 1.0);
}

inline double lab_f(double t) {
  return t > kLabDelta3 ? std::cbrt(t) : t / (3.0 * kLabDelta2) + 4.0 / 29.0;
}

inline double lab_f_deriv(double t) {
  return t > kLabDelta3 ? 1.0 / (3.0 * std::cbrt(t) * std::cbrt(t)) : 1.0 / (3.0 * kLabDelta2);
}

inline double lab_f_inv(double f) {
  return f > kLabDelta ? f * f * f : 3.0 * kLabDelta2 * (f - 4.0 / 29.0);
}

inline double lab_f_inv_deriv(double f) {
  return f > kLabDelta ? 3.0 * f * f : 3.0 * kLabDelta2;
}

inline void rgb_to_lab_pixel(double r, double g, double b, double* L, double* a, double* bb) {
  const double rl = srgb_linearize(r), gl = srgb_linearize(g), bl = srgb_linearize(b);
  const double x = kSrgbToXyz[0] * rl + kSrgbToXyz[1] * gl + kSrgbToXyz[2] * bl;
  const double y = kSrgbToXyz[3] * rl + kSrgbToXyz[4] * gl + kSrgbToXyz[5] * bl;
  const double z = kSrgbToXyz[6] * rl + kSrgbToXyz[7] * gl + kSrgbToXyz[8] * bl;
  const double fx = lab_f(x / kWhiteX), fy = lab_f(y / kWhiteY), fz = lab_f(z / kWhiteZ);
  *L = 116.0 * fy - 16.0;
  *a = 500.0 * (fx - fy);
  *bb = 200.0 * (fy - fz);
}

// Accumulates J^T * (gL, ga, gb) into (dr, dg, db); recomputes intermediates.
inline void rgb_to_lab_backward_pixel(double r, double g, double b, double gL, double ga,
                                      double gb, double* dr, double* dg, double* db) {
  const double rl = srgb_linearize(r), gl = srgb_linearize(g), bl = srgb_linearize(b);
  const double x = kSrgbToXyz[0] * rl + kSrgbToXyz[1] * gl + kSrgbToXyz[2] * bl;
  const double y = kSrgbToXyz[3] * rl + kSrgbToXyz[4] * gl + kSrgbToXyz[5] * bl;
  const double z = kSrgbToXyz[6] * rl + kSrgbToXyz[7] * gl + kSrgbToXyz[8] * bl;
  const double dfx = 500.0 * ga;
  const double dfy = 116.0 * gL - 500.0 * ga + 200.0 * gb;
  const double dfz = -200.0 * gb;
  const double dx = dfx * lab_f_deriv(x / kWhiteX) / kWhiteX;
  const double dy = dfy * lab_f_deriv(y / kWhiteY) / kWhiteY;
  const double dz = dfz * lab_f_deriv(z / kWhiteZ) / kWhiteZ;
  const double drl = kSrgbToXyz[0] * dx + kSrgbToXyz[3] * dy + kSrgbToXyz[6] * dz;
  const double dgl = kSrgbToXyz[1] * dx + kSrgbToXyz[4] * dy + kSrgbToXyz[7] * dz;
  const double dbl = kSrgbToXyz[2] * dx + kSrgbToXyz[5] * dy + kSrgbToXyz[8] * dz;
  *dr += drl * srgb_linearize_deriv(r);
  *dg += dgl * srgb_linearize_deriv(g);
  *db += dbl * srgb_linearize_deriv(b);
}

inline void lab_to_rgb_pixel(double L, double a, double bb, double* r, double* g, double* b) {
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - bb / 200.0;
  const double x = lab_f_inv(fx) * kWhiteX;
  const double y = lab_f_inv(fy) * kWhiteY;
  const double z = lab_f_inv(fz) * kWhiteZ;
  const double rl = kXyzToSrgb[0] * x + kXyzToSrgb[1] * y + kXyzToSrgb[2] * z;
  const double gl = kXyzToSrgb[3] * x + kXyzToSrgb[4] * y + kXyzToSrgb[5] * z;
  const double bl = kXyzToSrgb[6] * x + kXyzToSrgb[7] * y + kXyzToSrgb[8] * z;
  *r = srgb_delinearize(rl);
  *g = srgb_delinearize(gl);
  *b = srgb_delinearize(bl);
}

inline void lab_to_rgb_backward_pixel(double L, double a, double bb, double gr, double gg,
                                      double gb, double* dL, double* da, double* db) {
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - bb / 200.0;
  const double x = lab_f_inv(fx) * kWhiteX;
  const double y = lab_f_inv(fy) * kWhiteY;
  const double z = lab_f_inv(fz) * kWhiteZ;
  const double rl = kXyzToSrgb[0] * x + kXyzToSrgb[1] * y + kXyzToSrgb[2] * z;
  const double gl = kXyzToSrgb[3] * x + kXyzToSrgb[4] * y + kXyzToSrgb[5] * z;
  const double bl = kXyzToSrgb[6] * x + kXyzToSrgb[7] * y + kXyzToSrgb[8] * z;
  const double drl = gr * srgb_delinearize_deriv(rl);
  const double dgl = gg * srgb_delinearize_deriv(gl);
  const double dbl = gb * srgb_delinearize_deriv(bl);
  const double dx = kXyzToSrgb[0] * drl + kXyzToSrgb[3] * dgl + kXyzToSrgb[6] * dbl;
  const double dy = kXyzToSrgb[1] * drl + kXyzToSrgb[4] * dgl + kXyzToSrgb[7] * dbl;
  const double dz = kXyzToSrgb[2] * drl + kXyzToSrgb[5] * dgl + kXyzToSrgb[8] * dbl;
  const double dfx = dx * kWhiteX * lab_f_inv_deriv(fx);
  const double dfy = dy * kWhiteY * lab_f_inv_deriv(fy);
  const double dfz = dz * kWhiteZ * lab_f_inv_deriv(fz);
  *dL += (dfx + dfy + dfz) / 116.0;
  *da += dfx / 500.0;
  *db += -dfz / 200.0;
}

}  // namespace advstyle::detail
