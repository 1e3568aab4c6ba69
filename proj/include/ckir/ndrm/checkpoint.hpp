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

// Checkpoint layout, little-endian:
//
//   "NDRM"  u32 version  u32 entry_count
//   entry_count x { u32 name_len, name bytes, u32 rank, rank x u32 extent,
//                   numel x f32 value }
//
// The model configuration travels as three extra entries ("config.dims",
// "config.kernel_mu", "config.kernel_sigma") ahead of the parameters, which
// follow in ForEachSlot order.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ckir/ndrm/params.hpp"

namespace ckir::ndrm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelConfig config;
    ModelParams<float> params;
};

std::string
SerializeCheckpoint(const ModelConfig& config, const ModelParams<float>& params);

/// FormatError on bad magic, a version other than kCheckpointVersion (naming
/// both), truncation, unknown or missing entries, or shapes that disagree with
/// the stored configuration.
Checkpoint
ParseCheckpoint(std::string_view bytes, const std::string& what);

void
SaveCheckpoint(const std::string& path, const ModelConfig& config, const ModelParams<float>& params);
Checkpoint
LoadCheckpoint(const std::string& path);

/// Digest of the serialized checkpoint, recorded in index headers.
std::uint64_t
CheckpointDigest(const ModelConfig& config, const ModelParams<float>& params);

}  // namespace ckir::ndrm
