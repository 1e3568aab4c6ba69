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
#include <functional>
#include <initializer_list>
#include <string_view>
#include <vector>

#include "ckir/numerics/tensor.hpp"

namespace ckir::num {

template <typename T>
class Tape;

/// Handle to a node recorded on a tape. Cheap to copy; valid while the tape lives.
template <typename T>
struct Var {
    Tape<T>* tape = nullptr;
    std::uint32_t id = 0;

    const Tensor<T>&
    value() const {
        return tape->value(*this);
    }
    const Shape&
    shape() const {
        return value().shape();
    }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the recording
/// order is already a topological order and Backward() walks it in reverse.
/// A tape belongs to one thread; several tapes may read shared parameters.
template <typename T>
class Tape {
 public:
    /// Propagates the node's gradient into its parents' buffers.
    using Backprop = std::function<void(Tape&, std::uint32_t self)>;

    struct NodeInfo {
        std::string_view op;
        Shape shape;
    };

    Var<T>
    Constant(Tensor<T> value);

    /// A differentiable input (model parameter or grad-check variable).
    Var<T>
    Leaf(Tensor<T> value);

    /// Appends an op result. Throws NonFinite if `value` holds NaN/Inf.
    /// The backprop closure is dropped when no parent needs a gradient.
    Var<T>
    Record(std::string_view op,
           Tensor<T> value,
           std::initializer_list<Var<T>> parents,
           Backprop backprop);

    const Tensor<T>&
    value(Var<T> v) const {
        return nodes_[v.id].value;
    }
    bool
    requires_grad(Var<T> v) const {
        return nodes_[v.id].requires_grad;
    }

    /// Gradient after Backward(); zeros if the node received none.
    Tensor<T>
    Grad(Var<T> v) const;

    /// Gradient buffer of `id` if it takes part in differentiation, else nullptr.
    /// Allocated zero-filled on first use. Only meaningful inside a backprop.
    Tensor<T>*
    GradBuffer(std::uint32_t id);

    const Tensor<T>&
    OutGrad(std::uint32_t self) const {
        return nodes_[self].grad;
    }

    /// Throws NonScalarLoss unless `loss` holds exactly one value.
    void
    Backward(Var<T> loss);

    std::size_t
    size() const {
        return nodes_.size();
    }
    NodeInfo
    info(std::size_t i) const {
        return {nodes_[i].op, nodes_[i].value.shape()};
    }

 private:
    struct Node {
        std::string_view op;
        Tensor<T> value;
        Tensor<T> grad;
        bool has_grad = false;
        bool requires_grad = false;
        Backprop backprop;
    };

    Var<T>
    Push(Node node);

    std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace ckir::num
