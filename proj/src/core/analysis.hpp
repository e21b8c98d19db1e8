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

#include <array>
#include <string>
#include <vector>

#include "core/data.hpp"

namespace advstyle {

/// One row per image: the 6-dim image-level style feature (for external
/// embedding tools).
struct StyleTableRow {
  std::string id;
  std::array<double, 3> mu;
  std::array<double, 3> sd;
};

std::vector<StyleTableRow> extract_style_features(const Dataset& data);

/// Concatenated per-channel pixel-value histograms over a dataset: each
/// channel's counts are L1-normalized then rescaled by the bin count, so
/// every length-`bins` block sums to `bins`.
struct StyleHistogram {
  std::size_t bins = 8;
  std::vector<double> feature;  // length 3 * bins
};

StyleHistogram histogram_feature(const std::vector<LabeledImage>& images, std::size_t bins = 8);

inline StyleHistogram histogram_feature(const Dataset& data, std::size_t bins = 8) {
  return histogram_feature(data.items, bins);
}

/// KL distance between two histogram features: `smoothing` is added to every
/// entry, each channel block is renormalized to sum to `bins`, and
/// sum_i p_i ln(p_i / q_i) is taken over the whole concatenated vector.
double kl_distance(const StyleHistogram& p, const StyleHistogram& q, double smoothing = 1e-6);

/// Shared CSV float formatting so command output and library output agree
/// byte for byte.
std::string format_double(double v);

void write_style_table_csv(const std::string& path, const std::vector<StyleTableRow>& rows);

}  // namespace advstyle
