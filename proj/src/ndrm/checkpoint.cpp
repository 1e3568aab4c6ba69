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

#include "ckir/ndrm/checkpoint.hpp"

#include <map>

#include "ckir/common/error.hpp"
#include "ckir/common/io.hpp"

namespace ckir::ndrm {

namespace {

constexpr std::string_view kMagic = "NDRM";
constexpr std::size_t kDimCount = 9;

using num::Shape;
using num::Tensor;

void
WriteEntry(ByteWriter& w, const std::string& name, const Tensor<float>& t) {
    w.U32(static_cast<std::uint32_t>(name.size()));
    w.Bytes(name);
    w.U32(static_cast<std::uint32_t>(t.shape().rank()));
    for (std::size_t i = 0; i < t.shape().rank(); ++i) {
        w.U32(static_cast<std::uint32_t>(t.shape()[i]));
    }
    for (float v : t.values()) {
        w.F32(v);
    }
}

Tensor<float>
Vector(const std::vector<float>& v) {
    return Tensor<float>(Shape{v.size()}, v);
}

Shape
MakeShape(const std::vector<std::size_t>& ext, const std::string& what) {
    switch (ext.size()) {
        case 0:
            return Shape{};
        case 1:
            return Shape{ext[0]};
        case 2:
            return Shape{ext[0], ext[1]};
        case 3:
            return Shape{ext[0], ext[1], ext[2]};
        default:
            Throw(ErrorCode::FormatError, what + ": entry rank above 3");
    }
}

}  // namespace

std::string
SerializeCheckpoint(const ModelConfig& config, const ModelParams<float>& params) {
    ByteWriter w;
    w.Bytes(kMagic);
    w.U32(kCheckpointVersion);
    std::uint32_t count = 3;
    ForEachSlot(params, [&](const std::string&, const Tensor<float>&) { ++count; });
    w.U32(count);

    const std::vector<float> dims{
        static_cast<float>(config.embed_dim),   static_cast<float>(config.key_dim),
        static_cast<float>(config.value_dim),   static_cast<float>(config.num_layers),
        static_cast<float>(config.conv_window), static_cast<float>(config.ffn_dim),
        static_cast<float>(config.max_doc_len), static_cast<float>(config.max_query_len),
        static_cast<float>(static_cast<int>(config.variant)),
    };
    WriteEntry(w, "config.dims", Vector(dims));
    WriteEntry(w, "config.kernel_mu", Vector(config.kernel_mus));
    WriteEntry(w, "config.kernel_sigma", Vector(config.kernel_sigmas));
    ForEachSlot(params, [&](const std::string& name, const Tensor<float>& t) { WriteEntry(w, name, t); });
    return w.str();
}

Checkpoint
ParseCheckpoint(std::string_view bytes, const std::string& what) {
    ByteReader r(bytes, what);
    if (bytes.size() < kMagic.size() || r.Bytes(kMagic.size()) != kMagic) {
        Throw(ErrorCode::FormatError, what + ": bad magic, not a checkpoint");
    }
    const std::uint32_t version = r.U32();
    if (version != kCheckpointVersion) {
        Throw(ErrorCode::FormatError, what + ": checkpoint version " + std::to_string(version) +
                                          " is not supported (expected version " +
                                          std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint32_t count = r.U32();
    std::map<std::string, Tensor<float>> entries;
    std::vector<std::string> order;
    for (std::uint32_t e = 0; e < count; ++e) {
        std::string name(r.Bytes(r.U32()));
        const std::uint32_t rank = r.U32();
        if (rank > Shape::kMaxRank) {
            Throw(ErrorCode::FormatError, what + ": entry '" + name + "' has rank " + std::to_string(rank));
        }
        std::vector<std::size_t> ext(rank);
        std::size_t numel = 1;
        for (auto& x : ext) {
            x = r.U32();
            numel *= x;
        }
        if (numel > (bytes.size() - r.pos()) / 4) {
            Throw(ErrorCode::FormatError, what + ": entry '" + name + "' is truncated");
        }
        std::vector<float> values(numel);
        for (auto& v : values) {
            v = r.F32();
        }
        order.push_back(name);
        if (!entries.emplace(name, Tensor<float>(MakeShape(ext, what), std::move(values))).second) {
            Throw(ErrorCode::FormatError, what + ": duplicate entry '" + name + "'");
        }
    }
    if (!r.AtEnd()) {
        Throw(ErrorCode::FormatError, what + ": trailing bytes after the last entry");
    }

    auto take = [&](const std::string& name) -> Tensor<float>& {
        auto it = entries.find(name);
        if (it == entries.end()) {
            Throw(ErrorCode::FormatError, what + ": missing entry '" + name + "'");
        }
        return it->second;
    };

    Checkpoint ck;
    const Tensor<float>& dims = take("config.dims");
    if (dims.size() != kDimCount) {
        Throw(ErrorCode::FormatError, what + ": config.dims has " + std::to_string(dims.size()) + " values");
    }
    ModelConfig& c = ck.config;
    c.embed_dim = static_cast<std::size_t>(dims[0]);
    c.key_dim = static_cast<std::size_t>(dims[1]);
    c.value_dim = static_cast<std::size_t>(dims[2]);
    c.num_layers = static_cast<std::size_t>(dims[3]);
    c.conv_window = static_cast<std::size_t>(dims[4]);
    c.ffn_dim = static_cast<std::size_t>(dims[5]);
    c.max_doc_len = static_cast<std::size_t>(dims[6]);
    c.max_query_len = static_cast<std::size_t>(dims[7]);
    const int variant = static_cast<int>(dims[8]);
    if (variant < 1 || variant > 3) {
        Throw(ErrorCode::FormatError, what + ": unknown model variant " + std::to_string(variant));
    }
    c.variant = static_cast<Variant>(variant);
    auto mus = take("config.kernel_mu").values();
    auto sigmas = take("config.kernel_sigma").values();
    c.kernel_mus.assign(mus.begin(), mus.end());
    c.kernel_sigmas.assign(sigmas.begin(), sigmas.end());
    try {
        c.Validate();
    } catch (const Error& e) {
        Throw(ErrorCode::FormatError, what + ": " + e.what());
    }

    const Tensor<float>& embedding = take("embedding");
    if (embedding.shape().rank() != 2) {
        Throw(ErrorCode::FormatError, what + ": embedding must be a matrix");
    }
    ck.params = ZeroParams<float>(c, embedding.shape()[0]);
    std::size_t used = 3;
    ForEachSlot(ck.params, [&](const std::string& name, Tensor<float>& slot) {
        Tensor<float>& stored = take(name);
        if (!(stored.shape() == slot.shape())) {
            Throw(ErrorCode::FormatError, what + ": entry '" + name + "' has shape " + stored.shape().ToString() +
                                              ", expected " + slot.shape().ToString());
        }
        slot = std::move(stored);
        ++used;
    });
    if (used != entries.size()) {
        Throw(ErrorCode::FormatError, what + ": unexpected extra entries");
    }
    return ck;
}

void
SaveCheckpoint(const std::string& path, const ModelConfig& config, const ModelParams<float>& params) {
    WriteFileAtomic(path, SerializeCheckpoint(config, params));
}

Checkpoint
LoadCheckpoint(const std::string& path) {
    return ParseCheckpoint(ReadFileBytes(path), path);
}

std::uint64_t
CheckpointDigest(const ModelConfig& config, const ModelParams<float>& params) {
    return Fnv1a64(SerializeCheckpoint(config, params));
}

}  // namespace ckir::ndrm
