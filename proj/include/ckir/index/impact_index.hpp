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

// Inverted index of precomputed term impacts.
//
// File layout, little-endian:
//
//   "CKIX"  u32 version  u32 term_count  u32 doc_count  u64 model_digest
//   u8 expansion_mode  f32 threshold
//   doc_count x { u32 length, doc_id bytes }
//   term_count x { u32 term_id, f32 scale, u32 posting_count,
//                  posting_count x { varint doc_ref_delta, u8 level } }
//
// Terms are stored in ascending id order. The first delta of a list is the
// doc ref itself; later deltas are strictly positive. An impact is
// level * scale.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ckir/eval/trec.hpp"
#include "ckir/ndrm/model.hpp"

namespace ckir::index {

using corpus::TermId;

inline constexpr std::uint32_t kIndexVersion = 1;

enum class ExpansionMode : std::uint8_t {
    /// Score the document's own distinct terms.
    Own = 0,
    /// Score every vocabulary term.
    Full = 1,
};

std::string_view
ExpansionModeName(ExpansionMode mode);
/// "own" or "full"; InvalidArgument otherwise.
ExpansionMode
ParseExpansionMode(std::string_view name);

struct IndexConfig {
    ExpansionMode mode = ExpansionMode::Own;
    /// Impacts must exceed this to be stored.
    float threshold = 0.0f;
    std::size_t threads = 1;
};

struct TermImpact {
    TermId term = 0;
    float impact = 0.0f;
};

/// Impacts above `threshold` of the candidate terms, ascending by term id.
/// The document is encoded once. EmptyDocument if it has no tokens.
std::vector<TermImpact>
ScoreDocumentTerms(ndrm::DocumentScorer<float>& scorer,
                   std::span<const TermId> tokens,
                   const corpus::Vocabulary& vocab,
                   ExpansionMode mode,
                   float threshold);

/// round(255 x / term_max) clamped to [1, 255]. NonPositiveImpact unless
/// 0 < x and 0 < term_max.
std::uint8_t
Quantize(float impact, float term_max);

/// Per-term dequantisation step term_max / 255.
float
QuantScale(float term_max);

inline float
Dequantize(std::uint8_t level, float scale) {
    return static_cast<float>(level) * scale;
}

struct PostingList {
    float scale = 0.0f;
    std::vector<std::uint32_t> refs;  // strictly ascending
    std::vector<std::uint8_t> levels;
    /// Unquantised impacts; only present on freshly built indexes.
    std::vector<float> exact;
};

struct IndexMeta {
    std::uint64_t model_digest = 0;
    ExpansionMode mode = ExpansionMode::Own;
    float threshold = 0.0f;
};

class ImpactIndex {
 public:
    ImpactIndex() = default;
    ImpactIndex(IndexMeta meta, std::vector<std::string> doc_ids, std::map<TermId, PostingList> postings);

    const IndexMeta&
    meta() const {
        return meta_;
    }
    const std::vector<std::string>&
    doc_ids() const {
        return doc_ids_;
    }
    const std::map<TermId, PostingList>&
    postings() const {
        return postings_;
    }
    /// nullptr if the term has no postings.
    const PostingList*
    Find(TermId term) const;

    /// Top `k` documents with a positive score, the score being the sum over
    /// query token occurrences of each term's impact. Ties go to the larger
    /// doc id. `exact` uses unquantised impacts (InvalidArgument if absent).
    std::vector<eval::ScoredDoc>
    Retrieve(std::span<const TermId> query, std::size_t k, bool exact = false) const;

    std::string
    Serialize() const;
    /// FormatError on bad magic, version, truncation, unordered terms or
    /// postings, out-of-range refs, zero levels or non-positive scales.
    static ImpactIndex
    Parse(std::string_view bytes, const std::string& what);

    void
    Save(const std::string& path) const;
    static ImpactIndex
    Load(const std::string& path);

 private:
    IndexMeta meta_;
    std::vector<std::string> doc_ids_;
    std::map<TermId, PostingList> postings_;
};

/// Scores every document (in parallel when config.threads > 1, merged in
/// corpus order) and quantises each term's impacts against its own maximum.
/// EmptyCorpus without documents; EmptyDocument names the offending doc.
ImpactIndex
BuildIndex(const std::vector<std::string>& doc_ids,
           const std::vector<std::vector<TermId>>& doc_tokens,
           const ndrm::ModelParams<float>& params,
           const ndrm::ModelConfig& model_config,
           const corpus::Vocabulary& vocab,
           const IndexConfig& config,
           std::uint64_t model_digest);

/// Exact model scores of `candidates` for `query`, best first with the same
/// tie rule as retrieval. UnknownDocument for ids missing from `doc_ids`.
std::vector<eval::ScoredDoc>
Rerank(const ndrm::ModelParams<float>& params,
       const ndrm::ModelConfig& model_config,
       const corpus::Vocabulary& vocab,
       const std::vector<std::string>& doc_ids,
       const std::vector<std::vector<TermId>>& doc_tokens,
       std::span<const TermId> query,
       const std::vector<std::string>& candidates);

/// Kendall tau-b between two paired score lists; 1 when either has no
/// untied pair.
double
KendallTau(std::span<const double> a, std::span<const double> b);

}  // namespace ckir::index
