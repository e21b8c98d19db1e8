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

#include "core/style.hpp"

#include <stdexcept>
#include <string>

namespace advstyle {

std::vector<PatchRect> patch_rects(std::size_t h, std::size_t w, std::size_t rows,
                                   std::size_t cols) {
  if (rows == 0 || cols == 0 || rows > h || cols > w)
    throw std::invalid_argument("patch_rects: grid " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " does not fit image " +
                                std::to_string(h) + "x" + std::to_string(w));
  const std::size_t base_h = h / rows;
  const std::size_t base_w = w / cols;
  std::vector<PatchRect> rects;
  rects.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t r0 = r * base_h;
    const std::size_t rh = (r + 1 == rows) ? h - r0 : base_h;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t c0 = c * base_w;
      const std::size_t cw = (c + 1 == cols) ? w - c0 : base_w;
      rects.push_back({r0, c0, rh, cw});
    }
  }
  return rects;
}

}  // namespace advstyle
