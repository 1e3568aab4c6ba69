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

#include "ckir/numerics/tensor.hpp"

#include <cmath>

#include "ckir/common/error.hpp"

namespace ckir::num {

Shape::Shape(std::initializer_list<std::size_t> extents) {
    if (extents.size() > kMaxRank) {
        Throw(ErrorCode::ShapeMismatch, "rank above 3 is not supported");
    }
    for (std::size_t e : extents) {
        extents_[rank_++] = e;
    }
}

std::size_t
Shape::numel() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rank_; ++i) {
        n *= extents_[i];
    }
    return n;
}

std::size_t
Shape::rows() const {
    switch (rank_) {
        case 0:
        case 1:
            return 1;
        case 2:
            return extents_[0];
        default:
            return extents_[0] * extents_[1];
    }
}

std::size_t
Shape::cols() const {
    return rank_ == 0 ? 1 : extents_[rank_ - 1];
}

std::string
Shape::ToString() const {
    std::string s = "(";
    for (std::size_t i = 0; i < rank_; ++i) {
        if (i > 0) {
            s += ", ";
        }
        s += std::to_string(extents_[i]);
    }
    return s + ")";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
        Throw(ErrorCode::ShapeMismatch,
              "data length " + std::to_string(data_.size()) + " does not fit shape " +
                  shape_.ToString());
    }
}

template <typename T>
bool
Tensor<T>::AllFinite() const {
    for (T v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace ckir::num
