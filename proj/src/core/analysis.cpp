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

#include "core/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace advstyle {

std::vector<StyleTableRow> extract_style_features(const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("extract_style_features: empty dataset");
  std::vector<StyleTableRow> rows;
  rows.reserve(data.size());
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    const Tensor<float>& img = data[idx].image;
    if (img.rank() != 3 || img.dim(0) != 3)
      throw std::invalid_argument("extract_style_features: expected [3,H,W] images");
    const std::size_t hw = img.dim(1) * img.dim(2);
    StyleTableRow row;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05zu", idx);
    row.id = buf;
    for (std::size_t c = 0; c < 3; ++c) {
      const float* p = img.data() + c * hw;
      double m = 0;
      for (std::size_t i = 0; i < hw; ++i) m += p[i];
      m /= static_cast<double>(hw);
      double v = 0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double d = p[i] - m;
        v += d * d;
      }
      row.mu[c] = m;
      row.sd[c] = std::sqrt(v / static_cast<double>(hw));
    }
    rows.push_back(row);
  }
  return rows;
}

StyleHistogram histogram_feature(const std::vector<LabeledImage>& images, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("histogram_feature: need at least 2 bins");
  if (images.empty()) throw std::invalid_argument("histogram_feature: empty dataset");
  StyleHistogram hist;
  hist.bins = bins;
  hist.feature.assign(3 * bins, 0.0);
  std::vector<std::int64_t> counts(3 * bins, 0);
  std::size_t pixels = 0;
  for (const auto& item : images) {
    const Tensor<float>& img = item.image;
    if (img.rank() != 3 || img.dim(0) != 3)
      throw std::invalid_argument("histogram_feature: expected [3,H,W] images");
    const std::size_t hw = img.dim(1) * img.dim(2);
    pixels += hw;
    for (std::size_t c = 0; c < 3; ++c) {
      const float* p = img.data() + c * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        // out-of-range values land in the boundary bins
        double v = p[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        std::size_t bin = static_cast<std::size_t>(v * static_cast<double>(bins));
        if (bin >= bins) bin = bins - 1;
        ++counts[c * bins + bin];
      }
    }
  }
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t b = 0; b < bins; ++b)
      hist.feature[c * bins + b] = static_cast<double>(counts[c * bins + b]) /
                                   static_cast<double>(pixels) * static_cast<double>(bins);
  return hist;
}

double kl_distance(const StyleHistogram& p, const StyleHistogram& q, double smoothing) {
  if (p.feature.size() != q.feature.size() || p.bins != q.bins)
    throw std::invalid_argument("kl_distance: feature length mismatch (" +
                                std::to_string(p.feature.size()) + " vs " +
                                std::to_string(q.feature.size()) + ")");
  if (smoothing <= 0) throw std::invalid_argument("kl_distance: smoothing must be > 0");
  const std::size_t bins = p.bins;
  const std::size_t blocks = p.feature.size() / bins;
  double total = 0;
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    double psum = 0, qsum = 0;
    for (std::size_t i = 0; i < bins; ++i) {
      psum += p.feature[blk * bins + i] + smoothing;
      qsum += q.feature[blk * bins + i] + smoothing;
    }
    const double pscale = static_cast<double>(bins) / psum;
    const double qscale = static_cast<double>(bins) / qsum;
    for (std::size_t i = 0; i < bins; ++i) {
      const double pv = (p.feature[blk * bins + i] + smoothing) * pscale;
      const double qv = (q.feature[blk * bins + i] + smoothing) * qscale;
      total += pv * std::log(pv / qv);
    }
  }
  return total;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_style_table_csv(const std::string& path, const std::vector<StyleTableRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write style table: " + path);
  os << "id,mu_r,mu_g,mu_b,sd_r,sd_g,sd_b\n";
  for (const auto& r : rows) {
    os << r.id;
    for (double m : r.mu) os << ',' << format_double(m);
    for (double s : r.sd) os << ',' << format_double(s);
    os << '\n';
  }
}

}  // namespace advstyle
