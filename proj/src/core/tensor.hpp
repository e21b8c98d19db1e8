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

#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace advstyle {

inline std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

inline std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

/// Gradient storage shared by every handle onto the same tensor payload.
/// `present` distinguishes "populated by backward" from "never touched".
template <typename T>
struct GradCell {
  std::vector<T> value;
  bool present = false;
};

/// Dense n-d tensor with value semantics over shared storage: copies share
/// the data buffer and the gradient cell. requires_grad is a per-handle flag,
/// so detached() yields a view of the same data that a tape will treat as a
/// constant. A rank-0 tensor (empty shape) is a scalar of size 1.
template <typename T>
class Tensor {
 public:
  Tensor()
      : data_(std::make_shared<std::vector<T>>(1, T(0))),
        grad_(std::make_shared<GradCell<T>>()) {}

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(shape_numel(shape_), T(0))),
        grad_(std::make_shared<GradCell<T>>()) {}

  Tensor(std::vector<std::size_t> shape, std::vector<T> values)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(std::move(values))),
        grad_(std::make_shared<GradCell<T>>()) {
    if (data_->size() != shape_numel(shape_))
      throw std::invalid_argument("tensor: " + std::to_string(data_->size()) +
                                  " values do not fill shape " + shape_str(shape_));
  }

  static Tensor scalar(T v) { return Tensor({}, {v}); }

  static Tensor full(std::vector<std::size_t> shape, T v) {
    Tensor t(std::move(shape));
    for (auto& x : *t.data_) x = v;
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_->size(); }
  bool is_scalar() const { return shape_.empty(); }

  T* data() { return data_->data(); }
  const T* data() const { return data_->data(); }
  T& operator[](std::size_t i) { return (*data_)[i]; }
  const T& operator[](std::size_t i) const { return (*data_)[i]; }

  bool requires_grad() const { return requires_grad_; }
  Tensor& set_requires_grad(bool b) {
    requires_grad_ = b;
    return *this;
  }

  bool grad_present() const { return grad_->present; }

  /// Gradient buffer, allocated (zeroed) on first access.
  std::vector<T>& grad() {
    ensure_grad();
    return grad_->value;
  }

  const std::vector<T>& grad() const {
    if (!grad_->present)
      throw std::runtime_error("tensor: gradient not populated; run backward first");
    return grad_->value;
  }

  void ensure_grad() {
    if (!grad_->present) {
      grad_->value.assign(size(), T(0));
      grad_->present = true;
    }
  }

  void zero_grad() {
    if (grad_->present) grad_->value.assign(size(), T(0));
  }

  /// Marks the gradient as absent (next backward starts fresh).
  void clear_grad() {
    grad_->present = false;
    grad_->value.clear();
  }

  /// View of the same data that no tape will differentiate through, with its
  /// own gradient cell so backward never writes into the original's.
  Tensor detached() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = data_;
    return t;
  }

  /// Deep copy of the values; requires_grad off, gradient empty.
  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<T>>(*data_);
    return t;
  }

  /// Same-values copy in another scalar type.
  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = static_cast<U>((*data_)[i]);
    return Tensor<U>(shape_, std::move(v));
  }

  bool same_storage(const Tensor& other) const { return data_ == other.data_; }

  std::shared_ptr<GradCell<T>> grad_cell() const { return grad_; }

 private:
  std::vector<std::size_t> shape_;
  std::shared_ptr<std::vector<T>> data_;
  std::shared_ptr<GradCell<T>> grad_;
  bool requires_grad_ = false;
};

/// Integer map (class labels). Not part of any differentiation graph.
class IntTensor {
 public:
  IntTensor() : data_(std::make_shared<std::vector<std::int32_t>>()) {}

  explicit IntTensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<std::int32_t>>(shape_numel(shape_), 0)) {}

  IntTensor(std::vector<std::size_t> shape, std::vector<std::int32_t> values)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<std::int32_t>>(std::move(values))) {
    if (data_->size() != shape_numel(shape_))
      throw std::invalid_argument("int tensor: values do not fill shape " + shape_str(shape_));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_->size(); }

  std::int32_t* data() { return data_->data(); }
  const std::int32_t* data() const { return data_->data(); }
  std::int32_t& operator[](std::size_t i) { return (*data_)[i]; }
  const std::int32_t& operator[](std::size_t i) const { return (*data_)[i]; }

  IntTensor clone() const {
    IntTensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<std::int32_t>>(*data_);
    return t;
  }

  bool same_storage(const IntTensor& other) const { return data_ == other.data_; }

 private:
  std::vector<std::size_t> shape_;
  std::shared_ptr<std::vector<std::int32_t>> data_;
};

}  // namespace advstyle
