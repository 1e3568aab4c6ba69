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

// Conformer-Kernel ranking models under query term independence.
//
// A document is encoded once by a stack of Conformer layers. Each query term
// is then scored against the encoding on its own, from its static (context
// free) embedding, and a query's score is the plain sum of its term scores.
// Every term score is non-negative, so per-term scores can be precomputed into
// an inverted index and summed at query time with the same result.
//
// All functions here record onto the tape that owns the bound parameters and
// are used unchanged for training (trainable leaves) and inference (constants).

#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ckir/corpus/vocabulary.hpp"
#include "ckir/ndrm/params.hpp"
#include "ckir/numerics/ops.hpp"

namespace ckir::ndrm {

using corpus::TermId;

template <typename T>
struct DocEncoding {
    num::Var<T> rows;  // n x D, unit rows at valid positions, zero rows elsewhere
    num::Mask mask;    // 1 where the token is not PAD
};

/// softmax_features(X Wq) * (softmax_sequence(X Wk)^T (X Wv)). The only
/// cross-token reduction is the d_key x d_value context; no n x n buffer is
/// formed. AllMasked if `mask` has no valid row.
template <typename T>
num::Var<T>
SeparableAttention(num::Var<T> x, const LayerSlots<num::Var<T>>& layer, const num::Mask& mask);

// Residual branches of a Conformer layer; each takes the block input.

/// OutProj(SeparableAttention(LN(x)))
template <typename T>
num::Var<T>
AttentionBranch(num::Var<T> x, const LayerSlots<num::Var<T>>& layer, const num::Mask& mask);
/// Mix(DepthwiseConv(mask(LN(x))) + bias); `mix` = false stops before the
/// pointwise projection.
template <typename T>
num::Var<T>
ConvBranch(num::Var<T> x, const LayerSlots<num::Var<T>>& layer, const num::Mask& mask, bool mix = true);
/// W2 relu(W1 LN(x) + b1) + b2
template <typename T>
num::Var<T>
FeedForwardBranch(num::Var<T> x, const LayerSlots<num::Var<T>>& layer);

/// Pre-norm residual stack of the three branches, masked rows zeroed after each.
template <typename T>
num::Var<T>
ConformerLayer(num::Var<T> x, const LayerSlots<num::Var<T>>& layer, const num::Mask& mask);

/// Embed, run every layer and L2-normalise the rows. EmptyDocument when all
/// tokens are PAD.
template <typename T>
DocEncoding<T>
EncodeDocument(const ModelVars<T>& params, std::span<const TermId> tokens);

/// Unit-norm static embeddings of `terms` (m x D).
template <typename T>
num::Var<T>
QueryEmbeddings(const ModelVars<T>& params, std::span<const TermId> terms);

/// Kernel-pooled cosine histogram of each query row against the valid document
/// rows: out[i,k] = log(1e-6 + sum_j exp(-(cos_ij - mu_k)^2 / (2 sigma_k^2))).
template <typename T>
num::Var<T>
KernelFeatures(num::Var<T> query_rows, const DocEncoding<T>& doc, const ModelConfig& config);

/// relu(w . features + b) per term (m x 1).
template <typename T>
num::Var<T>
Ndrm1TermScores(const ModelVars<T>& params,
                const DocEncoding<T>& doc,
                std::span<const TermId> terms,
                const ModelConfig& config);

/// Exact-match statistics of a batch of terms against one document.
struct ExactMatchInputs {
    std::vector<double> tf;
    std::vector<double> idf;
    double doc_len = 0.0;
    double avgdl = 1.0;
};

/// Counts of every distinct id in `tokens`.
std::unordered_map<TermId, std::uint32_t>
TermCounts(std::span<const TermId> tokens);

ExactMatchInputs
MakeExactMatchInputs(std::span<const TermId> terms,
                     const std::unordered_map<TermId, std::uint32_t>& counts,
                     std::size_t doc_len,
                     const corpus::Vocabulary& vocab);

/// softplus(w) * idf * tf / (tf + k1 (1 - b + b dl / avgdl)) per term (m x 1)
/// with k1 = softplus(k1_raw) and b = sigmoid(b_raw).
template <typename T>
num::Var<T>
Ndrm2TermScores(const ModelVars<T>& params, const ExactMatchInputs& inputs);

/// g * ndrm1 + (1 - g) * ndrm2 with g = sigmoid(gate_raw).
template <typename T>
num::Var<T>
CombineScores(const ModelVars<T>& params, num::Var<T> ndrm1, num::Var<T> ndrm2);

/// One document's view for scoring: its tokens, exact-match statistics and,
/// for variants with an encoder, its encoding.
template <typename T>
struct ScoringDoc {
    std::span<const TermId> tokens;
    std::unordered_map<TermId, std::uint32_t> counts;
    std::size_t doc_len = 0;
    std::optional<DocEncoding<T>> encoding;
};

/// Prepares a document for the configured variant. EmptyDocument if every
/// token is PAD.
template <typename T>
ScoringDoc<T>
PrepareDocument(const ModelVars<T>& params, const ModelConfig& config, std::span<const TermId> tokens);

/// Variant-dispatched term scores (m x 1) for real vocabulary terms
/// (ids >= kFirstTerm). InvalidArgument for PAD/UNK ids.
template <typename T>
num::Var<T>
TermScores(const ModelVars<T>& params,
           const ModelConfig& config,
           const corpus::Vocabulary& vocab,
           const ScoringDoc<T>& doc,
           std::span<const TermId> terms);

/// Sum of the term scores of every query token, with multiplicity. PAD and UNK
/// tokens contribute nothing; an empty query scores 0.
template <typename T>
num::Var<T>
QueryScore(const ModelVars<T>& params,
           const ModelConfig& config,
           const corpus::Vocabulary& vocab,
           const ScoringDoc<T>& doc,
           std::span<const TermId> query);

/// Inference over a frozen parameter snapshot: encodes one document once and
/// scores any number of term batches against it. Results are identical
/// whatever the batch composition, which the impact index relies on.
template <typename T>
class DocumentScorer {
 public:
    DocumentScorer(const ModelParams<T>& params,
                   const ModelConfig& config,
                   const corpus::Vocabulary& vocab,
                   std::span<const TermId> tokens);
    DocumentScorer(const DocumentScorer&) = delete;
    DocumentScorer&
    operator=(const DocumentScorer&) = delete;

    /// One score per entry of `terms`; PAD and UNK score 0.
    std::vector<T>
    TermScores(std::span<const TermId> terms);

    /// Left-to-right sum of TermScores(query).
    T
    QueryScore(std::span<const TermId> query);

 private:
    const ModelConfig& config_;
    const corpus::Vocabulary& vocab_;
    std::vector<TermId> tokens_;
    num::Tape<T> tape_;
    ModelVars<T> vars_;
    ScoringDoc<T> doc_;
};

}  // namespace ckir::ndrm
