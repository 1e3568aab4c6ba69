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

#include "ckir/corpus/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "ckir/common/error.hpp"
#include "ckir/common/io.hpp"

namespace ckir::corpus {

namespace {

// Flattened term stream; an empty string marks a field separator.
std::vector<std::string>
FlatTerms(const Document& doc, const Limits& limits) {
    std::vector<std::string> out;
    for (auto& field : FieldTokens(doc)) {
        if (!out.empty()) {
            out.emplace_back();
        }
        for (auto& t : field) {
            out.push_back(std::move(t));
        }
        if (out.size() >= limits.max_doc_len) {
            break;
        }
    }
    if (out.size() > limits.max_doc_len) {
        out.resize(limits.max_doc_len);
    }
    return out;
}

template <typename Int>
Int
ParseInt(std::string_view s, const std::string& path, std::size_t line) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        ThrowFormat(path, line, "bad integer '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

Vocabulary
Vocabulary::Build(std::span<const Document> docs, std::size_t min_df, const Limits& limits) {
    if (docs.empty()) {
        Throw(ErrorCode::EmptyCorpus, "cannot build a vocabulary from zero documents");
    }
    std::map<std::string, std::uint32_t> df;
    std::uint64_t total_len = 0;
    for (const auto& doc : docs) {
        const auto terms = FlatTerms(doc, limits);
        std::set<std::string_view> distinct;
        for (const auto& t : terms) {
            if (!t.empty()) {
                distinct.insert(t);
                ++total_len;
            }
        }
        for (auto t : distinct) {
            ++df[std::string(t)];
        }
    }

    Vocabulary v;
    v.num_docs_ = docs.size();
    v.avgdl_ = static_cast<double>(total_len) / static_cast<double>(docs.size());
    for (auto& [term, count] : df) {
        if (count >= std::max<std::size_t>(min_df, 1)) {
            v.ids_.emplace(term, static_cast<TermId>(v.terms_.size()) + kFirstTerm);
            v.terms_.push_back(term);
            v.df_.push_back(count);
        }
    }
    return v;
}

TermId
Vocabulary::Id(std::string_view term) const {
    auto it = ids_.find(std::string(term));
    return it == ids_.end() ? kUnk : it->second;
}

const std::string&
Vocabulary::Term(TermId id) const {
    static const std::string kPadTerm = "<pad>";
    static const std::string kUnkTerm = "<unk>";
    if (id == kPad) {
        return kPadTerm;
    }
    if (id < kFirstTerm || static_cast<std::size_t>(id - kFirstTerm) >= terms_.size()) {
        return kUnkTerm;
    }
    return terms_[static_cast<std::size_t>(id - kFirstTerm)];
}

std::uint32_t
Vocabulary::df(TermId id) const {
    if (id < kFirstTerm || static_cast<std::size_t>(id - kFirstTerm) >= df_.size()) {
        return 0;
    }
    return df_[static_cast<std::size_t>(id - kFirstTerm)];
}

double
Vocabulary::Idf(TermId id) const {
    const double n = static_cast<double>(num_docs_);
    const double d = static_cast<double>(df(id));
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double
Vocabulary::Idf(std::string_view term) const {
    return Idf(Id(term));
}

void
Vocabulary::Save(const std::string& path) const {
    std::string out = fmt::format("#ckir-vocab\t{}\t{:.17g}\n", num_docs_, avgdl_);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        out += fmt::format("{}\t{}\t{}\n", terms_[i], i + kFirstTerm, df_[i]);
    }
    WriteFileAtomic(path, out);
}

Vocabulary
Vocabulary::Load(const std::string& path) {
    LineReader reader(path);
    std::string line;
    if (!reader.Next(line)) {
        ThrowFormat(path, 1, "missing vocabulary header");
    }
    auto head = SplitTabs(line);
    if (head.size() != 3 || head[0] != "#ckir-vocab") {
        ThrowFormat(path, 1, "bad vocabulary header");
    }
    Vocabulary v;
    v.num_docs_ = ParseInt<std::uint64_t>(head[1], path, 1);
    try {
        v.avgdl_ = std::stod(std::string(head[2]));
    } catch (const std::exception&) {
        ThrowFormat(path, 1, "bad avgdl '" + std::string(head[2]) + "'");
    }
    while (reader.Next(line)) {
        auto cols = SplitTabs(line);
        if (cols.size() != 3) {
            ThrowFormat(path, reader.line_no(), "expected term<TAB>id<TAB>df");
        }
        const auto id = ParseInt<TermId>(cols[1], path, reader.line_no());
        if (id != static_cast<TermId>(v.terms_.size()) + kFirstTerm) {
            ThrowFormat(path, reader.line_no(), "ids must be contiguous from 2");
        }
        const auto df = ParseInt<std::uint32_t>(cols[2], path, reader.line_no());
        if (df == 0 || df > v.num_docs_) {
            ThrowFormat(path, reader.line_no(), "df out of range");
        }
        v.ids_.emplace(std::string(cols[0]), id);
        v.terms_.emplace_back(cols[0]);
        v.df_.push_back(df);
    }
    return v;
}

std::vector<TermId>
Flatten(const Document& doc, const Vocabulary& vocab, const Limits& limits) {
    const auto terms = FlatTerms(doc, limits);
    std::vector<TermId> ids;
    ids.reserve(terms.size());
    for (const auto& t : terms) {
        ids.push_back(t.empty() ? kPad : vocab.Id(t));
    }
    return ids;
}

std::vector<TermId>
EncodeQuery(std::string_view text, const Vocabulary& vocab, const Limits& limits) {
    std::vector<TermId> ids;
    for (const auto& t : Tokenize(text)) {
        if (ids.size() == limits.max_query_len) {
            break;
        }
        ids.push_back(vocab.Id(t));
    }
    return ids;
}

std::size_t
DocLength(std::span<const TermId> tokens) {
    return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](TermId t) { return t != kPad; }));
}

}  // namespace ckir::corpus
