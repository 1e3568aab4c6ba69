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

// Learnable state of the model family. The same slot layout is instantiated
// over tensors (ModelParams), tape handles (ModelVars) and anything else that
// needs one value per parameter, and ForEachSlot visits every slot in a fixed
// order under a stable dotted name. Checkpoints, the optimizer and gradient
// checks all rely on that order.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckir/ndrm/config.hpp"
#include "ckir/numerics/tape.hpp"

namespace ckir::ndrm {

template <typename F>
struct LayerSlots {
    // separable self-attention block
    F attn_norm_gain, attn_norm_bias;
    F query_proj, key_proj, value_proj;  // D x d_key, D x d_key, D x d_value
    F attn_out_proj, attn_out_bias;      // d_value x D, D
    // convolution block
    F conv_norm_gain, conv_norm_bias;
    F conv_kernel, conv_bias;  // w x D, D
    F conv_mix, conv_mix_bias;  // D x D, D
    // feed-forward block
    F ffn_norm_gain, ffn_norm_bias;
    F ffn_in, ffn_in_bias;    // D x ffn, ffn
    F ffn_out, ffn_out_bias;  // ffn x D, D
};

template <typename F>
struct ModelSlots {
    F embedding;  // (|vocab| + 2) x D, row 0 (PAD) held at zero
    std::vector<LayerSlots<F>> layers;
    F kernel_weight;  // K x 1
    F kernel_bias;    // 1
    // exact-match scorer: weight = softplus(raw), k1 = softplus(raw), b = sigmoid(raw)
    F exact_weight_raw, k1_raw, b_raw;
    // combination gate = sigmoid(raw)
    F gate_raw;
};

// (member, checkpoint name) for every per-layer slot, in visiting order.
#define CKIR_LAYER_SLOTS(X)                   \
    X(attn_norm_gain, "attn.norm.gain")       \
    X(attn_norm_bias, "attn.norm.bias")       \
    X(query_proj, "attn.query")               \
    X(key_proj, "attn.key")                   \
    X(value_proj, "attn.value")               \
    X(attn_out_proj, "attn.out")              \
    X(attn_out_bias, "attn.out_bias")         \
    X(conv_norm_gain, "conv.norm.gain")       \
    X(conv_norm_bias, "conv.norm.bias")       \
    X(conv_kernel, "conv.kernel")             \
    X(conv_bias, "conv.bias")                 \
    X(conv_mix, "conv.mix")                   \
    X(conv_mix_bias, "conv.mix_bias")         \
    X(ffn_norm_gain, "ffn.norm.gain")         \
    X(ffn_norm_bias, "ffn.norm.bias")         \
    X(ffn_in, "ffn.in")                       \
    X(ffn_in_bias, "ffn.in_bias")             \
    X(ffn_out, "ffn.out")                     \
    X(ffn_out_bias, "ffn.out_bias")

#define CKIR_HEAD_SLOTS(X)                \
    X(kernel_weight, "kernel.weight")     \
    X(kernel_bias, "kernel.bias")         \
    X(exact_weight_raw, "exact.weight_raw") \
    X(k1_raw, "exact.k1_raw")             \
    X(b_raw, "exact.b_raw")               \
    X(gate_raw, "gate.raw")

/// Calls fn(name, slot) for every slot. Works on const and mutable slots.
template <typename Slots, typename Fn>
void
ForEachSlot(Slots& s, Fn&& fn) {
    fn(std::string("embedding"), s.embedding);
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
        const std::string prefix = "layers." + std::to_string(i) + ".";
        auto& l = s.layers[i];
#define CKIR_VISIT(member, name) fn(prefix + name, l.member);
        CKIR_LAYER_SLOTS(CKIR_VISIT)
#undef CKIR_VISIT
    }
#define CKIR_VISIT(member, name) fn(std::string(name), s.member);
    CKIR_HEAD_SLOTS(CKIR_VISIT)
#undef CKIR_VISIT
}

/// Calls fn(a_slot, b_slot) pairwise over two slot sets of the same layer count.
template <typename A, typename B, typename Fn>
void
ZipSlots(A& a, B& b, Fn&& fn) {
    fn(a.embedding, b.embedding);
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        auto& la = a.layers[i];
        auto& lb = b.layers[i];
#define CKIR_VISIT(member, name) fn(la.member, lb.member);
        CKIR_LAYER_SLOTS(CKIR_VISIT)
#undef CKIR_VISIT
    }
#define CKIR_VISIT(member, name) fn(a.member, b.member);
    CKIR_HEAD_SLOTS(CKIR_VISIT)
#undef CKIR_VISIT
}

template <typename T>
using ModelParams = ModelSlots<num::Tensor<T>>;
template <typename T>
using ModelVars = ModelSlots<num::Var<T>>;

/// Parameters with the shapes `config` implies for an embedding table of
/// `table_rows` rows (vocabulary size + 2), all zero.
template <typename T>
ModelParams<T>
ZeroParams(const ModelConfig& config, std::size_t table_rows);

/// Matrices uniform(-0.1, 0.1), biases zero, layer-norm gains one, PAD row zero,
/// gate 0, exact-match scalars set so that weight = 1, k1 = 1.2, b = 0.75.
template <typename T>
ModelParams<T>
InitParams(const ModelConfig& config, std::size_t table_rows, std::uint64_t seed);

/// Puts every parameter on the tape, as a differentiable leaf when `trainable`
/// and as a constant otherwise.
template <typename T>
ModelVars<T>
Bind(num::Tape<T>& tape, const ModelParams<T>& params, bool trainable);

/// Gradients of every bound slot after Backward(); zeros where none flowed.
template <typename T>
ModelParams<T>
CollectGrads(const num::Tape<T>& tape, const ModelVars<T>& vars);

template <typename To, typename From>
ModelParams<To>
CastParams(const ModelParams<From>& params) {
    ModelParams<To> out;
    out.layers.resize(params.layers.size());
    ZipSlots(out, params, [](num::Tensor<To>& dst, const num::Tensor<From>& src) { dst = src.template Cast<To>(); });
    return out;
}

template <typename T>
std::size_t
ParamCount(const ModelParams<T>& params) {
    std::size_t n = 0;
    ForEachSlot(params, [&](const std::string&, const num::Tensor<T>& t) { n += t.size(); });
    return n;
}

}  // namespace ckir::ndrm
