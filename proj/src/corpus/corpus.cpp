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

#include "ckir/corpus/corpus.hpp"

#include <cctype>

#include "ckir/common/error.hpp"
#include "ckir/common/io.hpp"

namespace ckir::corpus {

namespace {

// Byte width of the whitespace code point starting at s[i], or 0.
std::size_t
WhitespaceWidth(std::string_view s, std::size_t i) {
    const auto b = [&](std::size_t k) -> unsigned char {
        return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0;
    };
    const unsigned char c = b(0);
    if (c == ' ' || (c >= '\t' && c <= '\r')) {
        return 1;
    }
    if (c == 0xC2 && (b(1) == 0x85 || b(1) == 0xA0)) {
        return 2;  // NEL, NBSP
    }
    if (c == 0xE1 && b(1) == 0x9A && b(2) == 0x80) {
        return 3;  // OGHAM SPACE MARK
    }
    if (c == 0xE2 && b(1) == 0x80 && ((b(2) >= 0x80 && b(2) <= 0x8A) || b(2) == 0xA8 || b(2) == 0xA9 || b(2) == 0xAF)) {
        return 3;  // EN QUAD..HAIR SPACE, LS, PS, NNBSP
    }
    if (c == 0xE2 && b(1) == 0x81 && b(2) == 0x9F) {
        return 3;  // MMSP
    }
    if (c == 0xE3 && b(1) == 0x80 && b(2) == 0x80) {
        return 3;  // IDEOGRAPHIC SPACE
    }
    return 0;
}

bool
IsPunct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

void
EmitPiece(std::string_view piece, std::vector<std::string>& out) {
    std::size_t begin = 0, end = piece.size();
    while (begin < end && IsPunct(piece[begin])) {
        ++begin;
    }
    while (end > begin && IsPunct(piece[end - 1])) {
        --end;
    }
    if (begin == end) {
        return;
    }
    std::string token(piece.substr(begin, end - begin));
    for (char& c : token) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    out.push_back(std::move(token));
}

}  // namespace

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    by_id_.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        if (docs_[i].doc_id.empty()) {
            Throw(ErrorCode::InvalidArgument, "document " + std::to_string(i) + " has an empty doc_id");
        }
        if (!by_id_.emplace(docs_[i].doc_id, i).second) {
            Throw(ErrorCode::InvalidArgument, "duplicate doc_id '" + docs_[i].doc_id + "'");
        }
    }
}

std::optional<std::size_t>
Corpus::Find(std::string_view doc_id) const {
    auto it = by_id_.find(std::string(doc_id));
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string>
Tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0, start = 0;
    while (i < text.size()) {
        const std::size_t w = WhitespaceWidth(text, i);
        if (w > 0) {
            EmitPiece(text.substr(start, i - start), out);
            i += w;
            start = i;
        } else {
            ++i;
        }
    }
    EmitPiece(text.substr(start), out);
    return out;
}

std::vector<std::vector<std::string>>
FieldTokens(const Document& doc) {
    std::vector<std::vector<std::string>> fields;
    auto add = [&](std::string_view text) {
        auto tokens = Tokenize(text);
        if (!tokens.empty()) {
            fields.push_back(std::move(tokens));
        }
    };
    add(doc.url);
    add(doc.title);
    add(doc.body);
    for (const auto& q : doc.click_queries) {
        add(q);
    }
    return fields;
}

Corpus
ReadDocuments(const std::string& path) {
    LineReader reader(path);
    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    while (reader.Next(line)) {
        if (line.empty()) {
            continue;
        }
        const auto cols = SplitTabs(line);
        if (cols.size() != 4) {
            ThrowFormat(path, reader.line_no(), "expected 4 tab-separated fields, found " + std::to_string(cols.size()));
        }
        if (cols[0].empty()) {
            ThrowFormat(path, reader.line_no(), "empty doc_id");
        }
        if (!seen.emplace(std::string(cols[0]), reader.line_no()).second) {
            ThrowFormat(path, reader.line_no(), "duplicate doc_id '" + std::string(cols[0]) + "'");
        }
        docs.push_back(Document{std::string(cols[0]), std::string(cols[1]), std::string(cols[2]),
                                std::string(cols[3]), {}});
    }
    return Corpus(std::move(docs));
}

std::size_t
AttachClicks(const std::string& path, Corpus& corpus) {
    LineReader reader(path);
    std::string line;
    std::size_t attached = 0;
    while (reader.Next(line)) {
        if (line.empty()) {
            continue;
        }
        const auto cols = SplitTabs(line);
        if (cols.size() != 3) {
            ThrowFormat(path, reader.line_no(), "expected 3 tab-separated fields, found " + std::to_string(cols.size()));
        }
        if (auto pos = corpus.Find(cols[2])) {
            corpus.docs()[*pos].click_queries.emplace_back(cols[1]);
            ++attached;
        }
    }
    return attached;
}

std::vector<Query>
ReadQueries(const std::string& path) {
    LineReader reader(path);
    std::vector<Query> queries;
    std::string line;
    while (reader.Next(line)) {
        if (line.empty()) {
            continue;
        }
        const auto cols = SplitTabs(line);
        if (cols.size() != 2) {
            ThrowFormat(path, reader.line_no(), "expected 2 tab-separated fields, found " + std::to_string(cols.size()));
        }
        if (cols[0].empty()) {
            ThrowFormat(path, reader.line_no(), "empty query_id");
        }
        queries.push_back(Query{std::string(cols[0]), std::string(cols[1])});
    }
    return queries;
}

void
WriteDocuments(const std::string& path, const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.docs()) {
        out += d.doc_id + '\t' + d.url + '\t' + d.title + '\t' + d.body + '\n';
    }
    WriteFileAtomic(path, out);
}

void
WriteQueries(const std::string& path, const std::vector<Query>& queries) {
    std::string out;
    for (const auto& q : queries) {
        out += q.query_id + '\t' + q.text + '\n';
    }
    WriteFileAtomic(path, out);
}

}  // namespace ckir::corpus
