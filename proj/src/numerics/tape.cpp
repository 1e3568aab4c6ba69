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

#include "ckir/numerics/tape.hpp"

#include <string>

#include "ckir/common/error.hpp"

namespace ckir::num {

template <typename T>
Var<T>
Tape<T>::Push(Node node) {
    nodes_.push_back(std::move(node));
    return Var<T>{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var<T>
Tape<T>::Constant(Tensor<T> value) {
    return Record("constant", std::move(value), {}, nullptr);
}

template <typename T>
Var<T>
Tape<T>::Leaf(Tensor<T> value) {
    if (!value.AllFinite()) {
        Throw(ErrorCode::NonFinite, "leaf value is not finite");
    }
    Node node;
    node.op = "leaf";
    node.value = std::move(value);
    node.requires_grad = true;
    return Push(std::move(node));
}

template <typename T>
Var<T>
Tape<T>::Record(std::string_view op,
                Tensor<T> value,
                std::initializer_list<Var<T>> parents,
                Backprop backprop) {
    if (!value.AllFinite()) {
        Throw(ErrorCode::NonFinite, "op '" + std::string(op) + "' produced a non-finite value");
    }
    Node node;
    node.op = op;
    node.value = std::move(value);
    for (const Var<T>& p : parents) {
        node.requires_grad = node.requires_grad || nodes_[p.id].requires_grad;
    }
    if (node.requires_grad) {
        node.backprop = std::move(backprop);
    }
    return Push(std::move(node));
}

template <typename T>
Tensor<T>
Tape<T>::Grad(Var<T> v) const {
    const Node& n = nodes_[v.id];
    return n.has_grad ? n.grad : Tensor<T>(n.value.shape());
}

template <typename T>
Tensor<T>*
Tape<T>::GradBuffer(std::uint32_t id) {
    Node& n = nodes_[id];
    if (!n.requires_grad) {
        return nullptr;
    }
    if (!n.has_grad) {
        n.grad = Tensor<T>(n.value.shape());
        n.has_grad = true;
    }
    return &n.grad;
}

template <typename T>
void
Tape<T>::Backward(Var<T> loss) {
    if (nodes_[loss.id].value.size() != 1) {
        Throw(ErrorCode::NonScalarLoss,
              "loss has shape " + nodes_[loss.id].value.shape().ToString());
    }
    for (Node& n : nodes_) {
        n.has_grad = false;
        n.grad = Tensor<T>();
    }
    Tensor<T>* seed = GradBuffer(loss.id);
    if (seed == nullptr) {
        return;
    }
    (*seed)[0] = T{1};
    for (std::uint32_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.has_grad && n.backprop) {
            n.backprop(*this, i);
        }
    }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace ckir::num
