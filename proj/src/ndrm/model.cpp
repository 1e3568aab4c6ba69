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

#include "ckir/ndrm/model.hpp"

#include <algorithm>

#include "ckir/common/error.hpp"

namespace ckir::ndrm {

using num::Mask;
using num::Shape;
using num::Tensor;
using num::Var;

template <typename T>
Var<T>
SeparableAttention(Var<T> x, const LayerSlots<Var<T>>& layer, const Mask& mask) {
    Var<T> q = num::MatMul(x, layer.query_proj);
    Var<T> k = num::MatMul(x, layer.key_proj);
    Var<T> v = num::MatMul(x, layer.value_proj);
    Var<T> q_weights = num::Softmax(q, 1);              // n x d_key, over features
    Var<T> k_weights = num::Softmax(k, 0, mask);        // n x d_key, over positions
    Var<T> context = num::MatMulTN(k_weights, v);       // d_key x d_value
    return num::MatMul(q_weights, context);             // n x d_value
}

template <typename T>
Var<T>
AttentionBranch(Var<T> x, const LayerSlots<Var<T>>& layer, const Mask& mask) {
    Var<T> h = num::LayerNorm(x, layer.attn_norm_gain, layer.attn_norm_bias);
    Var<T> a = SeparableAttention(h, layer, mask);
    return num::Add(num::MatMul(a, layer.attn_out_proj), layer.attn_out_bias);
}

template <typename T>
Var<T>
ConvBranch(Var<T> x, const LayerSlots<Var<T>>& layer, const Mask& mask, bool mix) {
    // padding positions enter the convolution as zeros
    Var<T> h = num::MaskRows(num::LayerNorm(x, layer.conv_norm_gain, layer.conv_norm_bias), mask);
    Var<T> c = num::Add(num::Conv1dDepthwise(h, layer.conv_kernel), layer.conv_bias);
    if (!mix) {
        return c;
    }
    return num::Add(num::MatMul(c, layer.conv_mix), layer.conv_mix_bias);
}

template <typename T>
Var<T>
FeedForwardBranch(Var<T> x, const LayerSlots<Var<T>>& layer) {
    Var<T> h = num::LayerNorm(x, layer.ffn_norm_gain, layer.ffn_norm_bias);
    Var<T> inner = num::Relu(num::Add(num::MatMul(h, layer.ffn_in), layer.ffn_in_bias));
    return num::Add(num::MatMul(inner, layer.ffn_out), layer.ffn_out_bias);
}

template <typename T>
Var<T>
ConformerLayer(Var<T> x, const LayerSlots<Var<T>>& layer, const Mask& mask) {
    Var<T> x1 = num::MaskRows(num::Add(x, AttentionBranch(x, layer, mask)), mask);
    Var<T> x2 = num::MaskRows(num::Add(x1, ConvBranch(x1, layer, mask)), mask);
    return num::MaskRows(num::Add(x2, FeedForwardBranch(x2, layer)), mask);
}

template <typename T>
DocEncoding<T>
EncodeDocument(const ModelVars<T>& params, std::span<const TermId> tokens) {
    Mask mask(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        mask[i] = tokens[i] != corpus::kPad ? 1 : 0;
    }
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
        Throw(ErrorCode::EmptyDocument, "document has no non-padding tokens");
    }
    Var<T> x = num::MaskRows(num::EmbeddingGather(params.embedding, tokens), mask);
    for (const auto& layer : params.layers) {
        x = ConformerLayer(x, layer, mask);
    }
    return DocEncoding<T>{num::NormalizeRows(x), std::move(mask)};
}

template <typename T>
Var<T>
QueryEmbeddings(const ModelVars<T>& params, std::span<const TermId> terms) {
    return num::NormalizeRows(num::EmbeddingGather(params.embedding, terms));
}

template <typename T>
Var<T>
KernelFeatures(Var<T> query_rows, const DocEncoding<T>& doc, const ModelConfig& config) {
    const std::vector<double> mus(config.kernel_mus.begin(), config.kernel_mus.end());
    const std::vector<double> sigmas(config.kernel_sigmas.begin(), config.kernel_sigmas.end());
    Var<T> cosine = num::MatMulNT(query_rows, doc.rows);  // m x n
    return num::KernelPool(cosine, doc.mask, mus, sigmas, T(1e-6));
}

template <typename T>
Var<T>
Ndrm1TermScores(const ModelVars<T>& params,
                const DocEncoding<T>& doc,
                std::span<const TermId> terms,
                const ModelConfig& config) {
    Var<T> features = KernelFeatures(QueryEmbeddings(params, terms), doc, config);
    return num::Relu(num::Add(num::MatMul(features, params.kernel_weight), params.kernel_bias));
}

std::unordered_map<TermId, std::uint32_t>
TermCounts(std::span<const TermId> tokens) {
    std::unordered_map<TermId, std::uint32_t> counts;
    for (TermId t : tokens) {
        if (t != corpus::kPad) {
            ++counts[t];
        }
    }
    return counts;
}

ExactMatchInputs
MakeExactMatchInputs(std::span<const TermId> terms,
                     const std::unordered_map<TermId, std::uint32_t>& counts,
                     std::size_t doc_len,
                     const corpus::Vocabulary& vocab) {
    ExactMatchInputs in;
    in.doc_len = static_cast<double>(doc_len);
    in.avgdl = vocab.avgdl() > 0.0 ? vocab.avgdl() : 1.0;
    for (TermId t : terms) {
        auto it = counts.find(t);
        in.tf.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
        in.idf.push_back(vocab.Idf(t));
    }
    return in;
}

template <typename T>
Var<T>
Ndrm2TermScores(const ModelVars<T>& params, const ExactMatchInputs& inputs) {
    num::Tape<T>& tape = *params.exact_weight_raw.tape;
    const std::size_t m = inputs.tf.size();
    Tensor<T> tf(Shape{m, 1});
    Tensor<T> idf(Shape{m, 1});
    for (std::size_t i = 0; i < m; ++i) {
        tf[i] = static_cast<T>(inputs.tf[i]);
        idf[i] = static_cast<T>(inputs.idf[i]);
    }
    Var<T> tf_v = tape.Constant(std::move(tf));
    Var<T> weight = num::Softplus(params.exact_weight_raw);
    Var<T> k1 = num::Softplus(params.k1_raw);
    Var<T> b = num::Sigmoid(params.b_raw);
    // 1 - b + b * dl / avgdl
    const T rel_len = static_cast<T>(inputs.doc_len / inputs.avgdl);
    Var<T> length_norm = num::Mul(k1, num::Affine(b, rel_len - T{1}, T{1}));
    Var<T> saturation = num::Div(tf_v, num::Add(tf_v, length_norm));
    return num::Mul(num::Mul(saturation, tape.Constant(std::move(idf))), weight);
}

template <typename T>
Var<T>
CombineScores(const ModelVars<T>& params, Var<T> ndrm1, Var<T> ndrm2) {
    Var<T> gate = num::Sigmoid(params.gate_raw);
    return num::Add(num::Mul(ndrm1, gate), num::Mul(ndrm2, num::Affine(gate, T{-1}, T{1})));
}

template <typename T>
ScoringDoc<T>
PrepareDocument(const ModelVars<T>& params, const ModelConfig& config, std::span<const TermId> tokens) {
    ScoringDoc<T> doc;
    doc.tokens = tokens;
    doc.doc_len = corpus::DocLength(tokens);
    if (doc.doc_len == 0) {
        Throw(ErrorCode::EmptyDocument, "document has no non-padding tokens");
    }
    if (config.variant != Variant::Ndrm1) {
        doc.counts = TermCounts(tokens);
    }
    if (UsesEncoder(config.variant)) {
        doc.encoding = EncodeDocument(params, tokens);
    }
    return doc;
}

template <typename T>
Var<T>
TermScores(const ModelVars<T>& params,
           const ModelConfig& config,
           const corpus::Vocabulary& vocab,
           const ScoringDoc<T>& doc,
           std::span<const TermId> terms) {
    for (TermId t : terms) {
        if (t < corpus::kFirstTerm) {
            Throw(ErrorCode::InvalidArgument, "term scores are defined for vocabulary terms only");
        }
    }
    switch (config.variant) {
        case Variant::Ndrm1:
            return Ndrm1TermScores(params, *doc.encoding, terms, config);
        case Variant::Ndrm2:
            return Ndrm2TermScores(params, MakeExactMatchInputs(terms, doc.counts, doc.doc_len, vocab));
        case Variant::Ndrm3:
            break;
    }
    Var<T> semantic = Ndrm1TermScores(params, *doc.encoding, terms, config);
    Var<T> exact = Ndrm2TermScores(params, MakeExactMatchInputs(terms, doc.counts, doc.doc_len, vocab));
    return CombineScores(params, semantic, exact);
}

template <typename T>
Var<T>
QueryScore(const ModelVars<T>& params,
           const ModelConfig& config,
           const corpus::Vocabulary& vocab,
           const ScoringDoc<T>& doc,
           std::span<const TermId> query) {
    std::vector<TermId> terms;
    for (TermId t : query) {
        if (t >= corpus::kFirstTerm) {
            terms.push_back(t);
        }
    }
    if (terms.empty()) {
        return params.embedding.tape->Constant(Tensor<T>::Scalar(T{0}));
    }
    return num::Sum(TermScores(params, config, vocab, doc, terms));
}

template <typename T>
DocumentScorer<T>::DocumentScorer(const ModelParams<T>& params,
                                  const ModelConfig& config,
                                  const corpus::Vocabulary& vocab,
                                  std::span<const TermId> tokens)
    : config_(config),
      vocab_(vocab),
      tokens_(tokens.begin(), tokens.end()),
      vars_(Bind(tape_, params, false)),
      doc_(PrepareDocument(vars_, config_, tokens_)) {
}

template <typename T>
std::vector<T>
DocumentScorer<T>::TermScores(std::span<const TermId> terms) {
    std::vector<T> out(terms.size(), T{0});
    std::vector<TermId> real;
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i] >= corpus::kFirstTerm) {
            real.push_back(terms[i]);
            slots.push_back(i);
        }
    }
    if (real.empty()) {
        return out;
    }
    const Tensor<T>& scores = ndrm::TermScores(vars_, config_, vocab_, doc_, real).value();
    for (std::size_t i = 0; i < real.size(); ++i) {
        out[slots[i]] = scores[i];
    }
    return out;
}

template <typename T>
T
DocumentScorer<T>::QueryScore(std::span<const TermId> query) {
    T total{0};
    for (T s : TermScores(query)) {
        total += s;
    }
    return total;
}

#define CKIR_INSTANTIATE_MODEL(T)                                                                             \
    template Var<T> SeparableAttention(Var<T>, const LayerSlots<Var<T>>&, const Mask&);                      \
    template Var<T> AttentionBranch(Var<T>, const LayerSlots<Var<T>>&, const Mask&);                         \
    template Var<T> ConvBranch(Var<T>, const LayerSlots<Var<T>>&, const Mask&, bool);                        \
    template Var<T> FeedForwardBranch(Var<T>, const LayerSlots<Var<T>>&);                                    \
    template Var<T> ConformerLayer(Var<T>, const LayerSlots<Var<T>>&, const Mask&);                          \
    template DocEncoding<T> EncodeDocument(const ModelVars<T>&, std::span<const TermId>);                   \
    template Var<T> QueryEmbeddings(const ModelVars<T>&, std::span<const TermId>);                          \
    template Var<T> KernelFeatures(Var<T>, const DocEncoding<T>&, const ModelConfig&);                      \
    template Var<T> Ndrm1TermScores(const ModelVars<T>&, const DocEncoding<T>&, std::span<const TermId>,    \
                                    const ModelConfig&);                                                     \
    template Var<T> Ndrm2TermScores(const ModelVars<T>&, const ExactMatchInputs&);                          \
    template Var<T> CombineScores(const ModelVars<T>&, Var<T>, Var<T>);                                      \
    template ScoringDoc<T> PrepareDocument(const ModelVars<T>&, const ModelConfig&, std::span<const TermId>); \
    template Var<T> TermScores(const ModelVars<T>&, const ModelConfig&, const corpus::Vocabulary&,          \
                               const ScoringDoc<T>&, std::span<const TermId>);                               \
    template Var<T> QueryScore(const ModelVars<T>&, const ModelConfig&, const corpus::Vocabulary&,          \
                               const ScoringDoc<T>&, std::span<const TermId>);                               \
    template class DocumentScorer<T>;

CKIR_INSTANTIATE_MODEL(float)
CKIR_INSTANTIATE_MODEL(double)

}  // namespace ckir::ndrm
