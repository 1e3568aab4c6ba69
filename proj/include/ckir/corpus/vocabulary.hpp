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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ckir/corpus/corpus.hpp"

namespace ckir::corpus {

/// Term <-> id map with the collection statistics the exact-match scorer needs.
/// Ids are contiguous from kFirstTerm, assigned in lexicographic term order.
/// Statistics are taken over the flattened, truncated token streams: df counts
/// documents containing the term, avgdl is the mean count of non-separator
/// tokens. Immutable after construction.
class Vocabulary {
 public:
    Vocabulary() = default;

    /// Keeps every term with df >= min_df. EmptyCorpus if `docs` is empty.
    static Vocabulary
    Build(std::span<const Document> docs, std::size_t min_df, const Limits& limits);

    /// Id of `term`, or kUnk.
    TermId
    Id(std::string_view term) const;
    const std::string&
    Term(TermId id) const;

    /// Number of stored terms (ids kFirstTerm .. kFirstTerm + size() - 1).
    std::size_t
    size() const {
        return terms_.size();
    }
    /// Rows of an embedding table covering every id including PAD and UNK.
    std::size_t
    table_size() const {
        return terms_.size() + kFirstTerm;
    }

    /// Document frequency; 0 for PAD, UNK and out-of-range ids.
    std::uint32_t
    df(TermId id) const;
    std::uint64_t
    num_docs() const {
        return num_docs_;
    }
    double
    avgdl() const {
        return avgdl_;
    }

    /// ln(1 + (N - df + 0.5) / (df + 0.5)); unknown terms take df = 0.
    double
    Idf(TermId id) const;
    double
    Idf(std::string_view term) const;

    /// Text format: a header `#ckir-vocab<TAB>N<TAB>avgdl` followed by
    /// `term<TAB>id<TAB>df` lines in id order.
    void
    Save(const std::string& path) const;
    static Vocabulary
    Load(const std::string& path);

    friend bool
    operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.terms_ == b.terms_ && a.df_ == b.df_ && a.num_docs_ == b.num_docs_ && a.avgdl_ == b.avgdl_;
    }

 private:
    std::vector<std::string> terms_;
    std::vector<std::uint32_t> df_;
    std::unordered_map<std::string, TermId> ids_;
    std::uint64_t num_docs_ = 0;
    double avgdl_ = 0.0;
};

/// Token ids of url, title, body and click queries joined by single PAD
/// separators, truncated to limits.max_doc_len. Unknown terms become UNK.
std::vector<TermId>
Flatten(const Document& doc, const Vocabulary& vocab, const Limits& limits);

/// Query token ids truncated to limits.max_query_len.
std::vector<TermId>
EncodeQuery(std::string_view text, const Vocabulary& vocab, const Limits& limits);

/// Number of non-PAD ids: the document length used by the exact-match scorer.
std::size_t
DocLength(std::span<const TermId> tokens);

}  // namespace ckir::corpus
