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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ckir::corpus {

using TermId = std::int32_t;

inline constexpr TermId kPad = 0;
inline constexpr TermId kUnk = 1;
inline constexpr TermId kFirstTerm = 2;

struct Limits {
    std::size_t max_doc_len = 1024;
    std::size_t max_query_len = 20;
};

struct Document {
    std::string doc_id;
    std::string url;
    std::string title;
    std::string body;
    std::vector<std::string> click_queries;
};

struct Query {
    std::string query_id;
    std::string text;
};

/// Documents in file order plus a doc_id lookup.
class Corpus {
 public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> docs);

    const std::vector<Document>&
    docs() const {
        return docs_;
    }
    std::vector<Document>&
    docs() {
        return docs_;
    }
    std::size_t
    size() const {
        return docs_.size();
    }
    bool
    empty() const {
        return docs_.empty();
    }

    /// Position of `doc_id` in docs(), if present.
    std::optional<std::size_t>
    Find(std::string_view doc_id) const;

 private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Lowercases, splits on Unicode whitespace, strips leading and trailing ASCII
/// punctuation from every piece and drops pieces that end up empty.
std::vector<std::string>
Tokenize(std::string_view text);

/// Field tokens in flattening order (url, title, body, click queries), with
/// empty fields skipped. Fields are joined by a single separator when flattened.
std::vector<std::vector<std::string>>
FieldTokens(const Document& doc);

// TSV readers. Malformed lines raise FormatError naming path and line.

/// `doc_id<TAB>url<TAB>title<TAB>body`
Corpus
ReadDocuments(const std::string& path);

/// ORCAS-style `query_id<TAB>query_text<TAB>doc_id`; clicks on documents absent
/// from the corpus are skipped. Returns the number of clicks attached.
std::size_t
AttachClicks(const std::string& path, Corpus& corpus);

/// `query_id<TAB>text`
std::vector<Query>
ReadQueries(const std::string& path);

void
WriteDocuments(const std::string& path, const Corpus& corpus);
void
WriteQueries(const std::string& path, const std::vector<Query>& queries);

}  // namespace ckir::corpus
