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

#include <string>

#include "core/model.hpp"
#include "core/tensor.hpp"

namespace advstyle {

/// Binary tensor file: magic "ATSR", u32 little-endian rank, rank u32
/// little-endian dims, then the row-major payload as little-endian 32-bit
/// floats.
void write_tensor_file(const std::string& path, const Tensor<float>& t);
Tensor<float> read_tensor_file(const std::string& path);

/// A checkpoint directory holds one ATSR file per parameter tensor plus a
/// manifest listing the model configuration and the tensor names/shapes in
/// order.
void save_checkpoint(const std::string& dir, const ModelState<float>& model);
ModelState<float> load_checkpoint(const std::string& dir);

}  // namespace advstyle
