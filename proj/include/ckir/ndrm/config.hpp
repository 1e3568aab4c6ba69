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

#include <cstddef>
#include <string_view>
#include <vector>

#include "ckir/corpus/corpus.hpp"

namespace ckir::ndrm {

/// Ndrm1: contextual encoder + kernel pooling. Ndrm2: learned exact-match
/// (BM25 form). Ndrm3: gated combination of the two.
enum class Variant { Ndrm1 = 1, Ndrm2 = 2, Ndrm3 = 3 };

std::string_view
VariantName(Variant v);
/// Accepts "ndrm1".."ndrm3" (any case); InvalidArgument otherwise.
Variant
ParseVariant(std::string_view name);

inline bool
UsesEncoder(Variant v) {
    return v != Variant::Ndrm2;
}

struct ModelConfig {
    std::size_t embed_dim = 64;
    std::size_t key_dim = 64;
    std::size_t value_dim = 64;
    std::size_t num_layers = 2;
    std::size_t conv_window = 7;
    std::size_t ffn_dim = 128;
    // float so that checkpoints reproduce the bank exactly
    std::vector<float> kernel_mus = DefaultKernelMus();
    std::vector<float> kernel_sigmas = DefaultKernelSigmas();
    std::size_t max_doc_len = 1024;
    std::size_t max_query_len = 20;
    Variant variant = Variant::Ndrm3;

    /// 1.0 followed by 0.9, 0.7, ..., -0.9 (11 kernels)
    static std::vector<float>
    DefaultKernelMus();
    /// 0.001 for the exact-match kernel, 0.1 elsewhere.
    static std::vector<float>
    DefaultKernelSigmas();

    std::size_t
    num_kernels() const {
        return kernel_mus.size();
    }

    corpus::Limits
    limits() const {
        return {max_doc_len, max_query_len};
    }

    /// InvalidArgument unless: window odd, at least two kernels, every sigma
    /// positive, exactly one kernel centred at 1.0, all dimensions positive.
    void
    Validate() const;
};

}  // namespace ckir::ndrm
