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

#include "ckir/numerics/adam.hpp"

#include <cmath>
#include <string>

#include "ckir/common/error.hpp"

namespace ckir::num {

template <typename T>
void
AdamStep(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads, AdamState<T>& state) {
    if (params.size() != grads.size()) {
        Throw(ErrorCode::ShapeMismatch, "adam: parameter and gradient counts differ");
    }
    if (state.first_moment.empty()) {
        for (const Tensor<T>* p : params) {
            state.first_moment.emplace_back(p->shape());
            state.second_moment.emplace_back(p->shape());
        }
    }
    if (state.first_moment.size() != params.size()) {
        Throw(ErrorCode::ShapeMismatch, "adam: optimizer state tracks a different parameter count");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!(params[i]->shape() == grads[i].shape()) || !(params[i]->shape() == state.first_moment[i].shape())) {
            Throw(ErrorCode::ShapeMismatch, "adam: parameter " + std::to_string(i) + " has shape " +
                                                params[i]->shape().ToString() + ", gradient " +
                                                grads[i].shape().ToString());
        }
    }

    const AdamConfig& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const T correct1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
    const T correct2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
    const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
    const T lr = static_cast<T>(c.lr), eps = static_cast<T>(c.eps);

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor<T>& w = *params[i];
        Tensor<T>& m = state.first_moment[i];
        Tensor<T>& v = state.second_moment[i];
        const Tensor<T>& g = grads[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = b1 * m[j] + (T{1} - b1) * g[j];
            v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
            const T m_hat = m[j] / correct1;
            const T v_hat = v[j] / correct2;
            w[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

template void
AdamStep<float>(std::span<Tensor<float>* const>, std::span<const Tensor<float>>, AdamState<float>&);
template void
AdamStep<double>(std::span<Tensor<double>* const>, std::span<const Tensor<double>>, AdamState<double>&);

}  // namespace ckir::num
