// Copyright 2026-present the ckir authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ckir::num {

/// Extents of a dense row-major array of rank 0..3.
class Shape {
 public:
    static constexpr std::size_t kMaxRank = 3;

    Shape() = default;
    Shape(std::initializer_list<std::size_t> extents);

    std::size_t
    rank() const {
        return rank_;
    }
    std::size_t
    operator[](std::size_t axis) const {
        return extents_[axis];
    }
    std::size_t
    numel() const;

    /// Rows/cols of a rank-2 view: rank 1 is a single row, rank 0 is 1x1.
    std::size_t
    rows() const;
    std::size_t
    cols() const;

    std::string
    ToString() const;

    friend bool
    operator==(const Shape& a, const Shape& b) {
        if (a.rank_ != b.rank_) {
            return false;
        }
        for (std::size_t i = 0; i < a.rank_; ++i) {
            if (a.extents_[i] != b.extents_[i]) {
                return false;
            }
        }
        return true;
    }

 private:
    std::array<std::size_t, kMaxRank> extents_{};
    std::size_t rank_ = 0;
};

template <typename T>
class Tensor {
 public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T{0}) : shape_(shape), data_(shape.numel(), fill) {
    }
    Tensor(Shape shape, std::vector<T> data);

    static Tensor
    Scalar(T v) {
        return Tensor(Shape{1}, std::vector<T>{v});
    }

    const Shape&
    shape() const {
        return shape_;
    }
    std::size_t
    size() const {
        return data_.size();
    }
    std::size_t
    rows() const {
        return shape_.rows();
    }
    std::size_t
    cols() const {
        return shape_.cols();
    }

    T&
    operator[](std::size_t i) {
        return data_[i];
    }
    const T&
    operator[](std::size_t i) const {
        return data_[i];
    }
    T&
    at(std::size_t r, std::size_t c) {
        return data_[r * cols() + c];
    }
    const T&
    at(std::size_t r, std::size_t c) const {
        return data_[r * cols() + c];
    }

    std::span<T>
    row(std::size_t r) {
        return {data_.data() + r * cols(), cols()};
    }
    std::span<const T>
    row(std::size_t r) const {
        return {data_.data() + r * cols(), cols()};
    }

    std::span<T>
    values() {
        return data_;
    }
    std::span<const T>
    values() const {
        return data_;
    }

    void
    Fill(T v) {
        std::fill(data_.begin(), data_.end(), v);
    }

    bool
    AllFinite() const;

    template <typename U>
    Tensor<U>
    Cast() const {
        return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

 private:
    Shape shape_;
    std::vector<T> data_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace ckir::num
