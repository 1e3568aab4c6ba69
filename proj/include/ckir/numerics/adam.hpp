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

#include <cstdint>
#include <span>
#include <vector>

#include "ckir/numerics/tensor.hpp"

namespace ckir::num {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<Tensor<T>> first_moment;
    std::vector<Tensor<T>> second_moment;
};

/// One bias-corrected adaptive-moment update of `params` in place. Moments are
/// created on the first call; afterwards every shape must match (ShapeMismatch).
template <typename T>
void
AdamStep(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads, AdamState<T>& state);

extern template void
AdamStep<float>(std::span<Tensor<float>* const>, std::span<const Tensor<float>>, AdamState<float>&);
extern template void
AdamStep<double>(std::span<Tensor<double>* const>, std::span<const Tensor<double>>, AdamState<double>&);

}  // namespace ckir::num
