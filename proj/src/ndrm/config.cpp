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

#include "ckir/ndrm/config.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "ckir/common/error.hpp"

namespace ckir::ndrm {

std::string_view
VariantName(Variant v) {
    switch (v) {
        case Variant::Ndrm1:
            return "ndrm1";
        case Variant::Ndrm2:
            return "ndrm2";
        case Variant::Ndrm3:
            return "ndrm3";
    }
    return "ndrm?";
}

Variant
ParseVariant(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "ndrm1") {
        return Variant::Ndrm1;
    }
    if (lower == "ndrm2") {
        return Variant::Ndrm2;
    }
    if (lower == "ndrm3") {
        return Variant::Ndrm3;
    }
    Throw(ErrorCode::InvalidArgument, "unknown model variant '" + std::string(name) + "'");
}

std::vector<float>
ModelConfig::DefaultKernelMus() {
    std::vector<float> mus{1.0f};
    for (int i = 9; i >= -9; i -= 2) {
        mus.push_back(static_cast<float>(i) / 10.0f);
    }
    return mus;
}

std::vector<float>
ModelConfig::DefaultKernelSigmas() {
    std::vector<float> sigmas(DefaultKernelMus().size(), 0.1f);
    sigmas[0] = 0.001f;
    return sigmas;
}

void
ModelConfig::Validate() const {
    auto fail = [](const std::string& what) { Throw(ErrorCode::InvalidArgument, "model config: " + what); };
    if (embed_dim == 0 || key_dim == 0 || value_dim == 0 || ffn_dim == 0) {
        fail("dimensions must be positive");
    }
    if (conv_window % 2 == 0) {
        fail("conv_window must be odd");
    }
    if (kernel_mus.size() < 2) {
        fail("at least two kernels are required");
    }
    if (kernel_sigmas.size() != kernel_mus.size()) {
        fail("kernel_mus and kernel_sigmas differ in length");
    }
    if (std::any_of(kernel_sigmas.begin(), kernel_sigmas.end(), [](float s) { return !(s > 0.0f); })) {
        fail("kernel widths must be positive");
    }
    if (std::count(kernel_mus.begin(), kernel_mus.end(), 1.0f) != 1) {
        fail("exactly one kernel must be centred at 1.0");
    }
    if (max_doc_len == 0 || max_query_len == 0) {
        fail("length limits must be positive");
    }
}

}  // namespace ckir::ndrm
