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

#include "ckir/ndrm/params.hpp"

#include <cmath>
#include <random>

namespace ckir::ndrm {

using num::Shape;
using num::Tensor;

template <typename T>
ModelParams<T>
ZeroParams(const ModelConfig& config, std::size_t table_rows) {
    const std::size_t d = config.embed_dim;
    ModelParams<T> p;
    p.embedding = Tensor<T>(Shape{table_rows, d});
    p.layers.resize(config.num_layers);
    for (auto& l : p.layers) {
        l.attn_norm_gain = Tensor<T>(Shape{d});
        l.attn_norm_bias = Tensor<T>(Shape{d});
        l.query_proj = Tensor<T>(Shape{d, config.key_dim});
        l.key_proj = Tensor<T>(Shape{d, config.key_dim});
        l.value_proj = Tensor<T>(Shape{d, config.value_dim});
        l.attn_out_proj = Tensor<T>(Shape{config.value_dim, d});
        l.attn_out_bias = Tensor<T>(Shape{d});
        l.conv_norm_gain = Tensor<T>(Shape{d});
        l.conv_norm_bias = Tensor<T>(Shape{d});
        l.conv_kernel = Tensor<T>(Shape{config.conv_window, d});
        l.conv_bias = Tensor<T>(Shape{d});
        l.conv_mix = Tensor<T>(Shape{d, d});
        l.conv_mix_bias = Tensor<T>(Shape{d});
        l.ffn_norm_gain = Tensor<T>(Shape{d});
        l.ffn_norm_bias = Tensor<T>(Shape{d});
        l.ffn_in = Tensor<T>(Shape{d, config.ffn_dim});
        l.ffn_in_bias = Tensor<T>(Shape{config.ffn_dim});
        l.ffn_out = Tensor<T>(Shape{config.ffn_dim, d});
        l.ffn_out_bias = Tensor<T>(Shape{d});
    }
    p.kernel_weight = Tensor<T>(Shape{config.num_kernels(), 1});
    p.kernel_bias = Tensor<T>(Shape{1});
    p.exact_weight_raw = Tensor<T>(Shape{1});
    p.k1_raw = Tensor<T>(Shape{1});
    p.b_raw = Tensor<T>(Shape{1});
    p.gate_raw = Tensor<T>(Shape{1});
    return p;
}

template <typename T>
ModelParams<T>
InitParams(const ModelConfig& config, std::size_t table_rows, std::uint64_t seed) {
    config.Validate();
    ModelParams<T> p = ZeroParams<T>(config, table_rows);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-0.1, 0.1);
    auto fill = [&](Tensor<T>& t) {
        for (auto& v : t.values()) {
            v = static_cast<T>(uniform(rng));
        }
    };

    fill(p.embedding);
    for (auto& v : p.embedding.row(corpus::kPad)) {
        v = T{0};
    }
    for (auto& l : p.layers) {
        l.attn_norm_gain.Fill(T{1});
        l.conv_norm_gain.Fill(T{1});
        l.ffn_norm_gain.Fill(T{1});
        fill(l.query_proj);
        fill(l.key_proj);
        fill(l.value_proj);
        fill(l.attn_out_proj);
        fill(l.conv_kernel);
        fill(l.conv_mix);
        fill(l.ffn_in);
        fill(l.ffn_out);
    }
    // start the rectified head in its linear region: w = 0, b = 1
    p.kernel_bias[0] = T{1};

    // inverse softplus / logit of the BM25-style starting point
    p.exact_weight_raw[0] = static_cast<T>(std::log(std::expm1(1.0)));
    p.k1_raw[0] = static_cast<T>(std::log(std::expm1(1.2)));
    p.b_raw[0] = static_cast<T>(std::log(0.75 / 0.25));
    p.gate_raw[0] = T{0};
    return p;
}

template <typename T>
ModelVars<T>
Bind(num::Tape<T>& tape, const ModelParams<T>& params, bool trainable) {
    ModelVars<T> vars;
    vars.layers.resize(params.layers.size());
    ZipSlots(vars, params, [&](num::Var<T>& v, const Tensor<T>& t) {
        v = trainable ? tape.Leaf(t) : tape.Constant(t);
    });
    return vars;
}

template <typename T>
ModelParams<T>
CollectGrads(const num::Tape<T>& tape, const ModelVars<T>& vars) {
    ModelParams<T> grads;
    grads.layers.resize(vars.layers.size());
    ZipSlots(grads, vars, [&](Tensor<T>& g, const num::Var<T>& v) { g = tape.Grad(v); });
    return grads;
}

#define CKIR_INSTANTIATE_PARAMS(T)                                                  \
    template ModelParams<T> ZeroParams<T>(const ModelConfig&, std::size_t);         \
    template ModelParams<T> InitParams<T>(const ModelConfig&, std::size_t, std::uint64_t); \
    template ModelVars<T> Bind<T>(num::Tape<T>&, const ModelParams<T>&, bool);      \
    template ModelParams<T> CollectGrads<T>(const num::Tape<T>&, const ModelVars<T>&);

CKIR_INSTANTIATE_PARAMS(float)
CKIR_INSTANTIATE_PARAMS(double)

}  // namespace ckir::ndrm
