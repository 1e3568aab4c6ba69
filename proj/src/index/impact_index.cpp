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

#include "ckir/index/impact_index.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <unordered_map>

#include "ckir/common/error.hpp"
#include "ckir/common/io.hpp"

namespace ckir::index {

namespace {

constexpr std::string_view kMagic = "CKIX";
// terms scored per batch; bounds the scorer's tape
constexpr std::size_t kTermBatch = 512;

bool
Better(const eval::ScoredDoc& a, const eval::ScoredDoc& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id > b.doc_id;
}

void
TopK(std::vector<eval::ScoredDoc>& docs, std::size_t k) {
    if (docs.size() > k) {
        std::partial_sort(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(k), docs.end(), Better);
        docs.resize(k);
    } else {
        std::sort(docs.begin(), docs.end(), Better);
    }
}

}  // namespace

std::string_view
ExpansionModeName(ExpansionMode mode) {
    return mode == ExpansionMode::Full ? "full" : "own";
}

ExpansionMode
ParseExpansionMode(std::string_view name) {
    std::string lower(name);
    for (auto& c : lower) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (lower == "own") {
        return ExpansionMode::Own;
    }
    if (lower == "full") {
        return ExpansionMode::Full;
    }
    Throw(ErrorCode::InvalidArgument, fmt::format("unknown expansion mode '{}' (expected own or full)", name));
}

std::vector<TermImpact>
ScoreDocumentTerms(ndrm::DocumentScorer<float>& scorer,
                   std::span<const TermId> tokens,
                   const corpus::Vocabulary& vocab,
                   ExpansionMode mode,
                   float threshold) {
    std::vector<TermId> candidates;
    if (mode == ExpansionMode::Full) {
        for (TermId t = corpus::kFirstTerm; t < static_cast<TermId>(vocab.table_size()); ++t) {
            candidates.push_back(t);
        }
    } else {
        for (TermId t : tokens) {
            if (t >= corpus::kFirstTerm) {
                candidates.push_back(t);
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }
    std::vector<TermImpact> out;
    for (std::size_t begin = 0; begin < candidates.size(); begin += kTermBatch) {
        const std::size_t end = std::min(candidates.size(), begin + kTermBatch);
        const std::span<const TermId> batch(candidates.data() + begin, end - begin);
        const std::vector<float> scores = scorer.TermScores(batch);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (scores[i] > threshold && scores[i] > 0.0f) {
                out.push_back(TermImpact{batch[i], scores[i]});
            }
        }
    }
    return out;
}

std::uint8_t
Quantize(float impact, float term_max) {
    if (!(impact > 0.0f) || !(term_max > 0.0f) || !std::isfinite(impact) || !std::isfinite(term_max)) {
        Throw(ErrorCode::NonPositiveImpact,
              fmt::format("cannot quantize impact {} against maximum {}", impact, term_max));
    }
    const double level = std::floor(255.0 * static_cast<double>(impact) / static_cast<double>(term_max) + 0.5);
    return static_cast<std::uint8_t>(std::clamp(level, 1.0, 255.0));
}

float
QuantScale(float term_max) {
    return static_cast<float>(static_cast<double>(term_max) / 255.0);
}

ImpactIndex::ImpactIndex(IndexMeta meta, std::vector<std::string> doc_ids, std::map<TermId, PostingList> postings)
    : meta_(meta), doc_ids_(std::move(doc_ids)), postings_(std::move(postings)) {
}

const PostingList*
ImpactIndex::Find(TermId term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
}

std::vector<eval::ScoredDoc>
ImpactIndex::Retrieve(std::span<const TermId> query, std::size_t k, bool exact) const {
    if (k == 0) {
        Throw(ErrorCode::InvalidArgument, "k must be at least 1");
    }
    // term at a time, in query order, so each document's sum is formed in
    // the same order as a direct query score
    std::unordered_map<std::uint32_t, float> acc;
    for (TermId t : query) {
        const PostingList* list = Find(t);
        if (list == nullptr) {
            continue;
        }
        if (exact && list->exact.size() != list->refs.size()) {
            Throw(ErrorCode::InvalidArgument, "index holds no unquantized impacts");
        }
        for (std::size_t i = 0; i < list->refs.size(); ++i) {
            acc[list->refs[i]] += exact ? list->exact[i] : Dequantize(list->levels[i], list->scale);
        }
    }
    std::vector<eval::ScoredDoc> docs;
    docs.reserve(acc.size());
    for (const auto& [ref, score] : acc) {
        if (score > 0.0f) {
            docs.push_back(eval::ScoredDoc{doc_ids_[ref], static_cast<double>(score)});
        }
    }
    TopK(docs, k);
    return docs;
}

std::string
ImpactIndex::Serialize() const {
    ByteWriter w;
    w.Bytes(kMagic);
    w.U32(kIndexVersion);
    w.U32(static_cast<std::uint32_t>(postings_.size()));
    w.U32(static_cast<std::uint32_t>(doc_ids_.size()));
    w.U64(meta_.model_digest);
    w.U8(static_cast<std::uint8_t>(meta_.mode));
    w.F32(meta_.threshold);
    for (const auto& id : doc_ids_) {
        w.U32(static_cast<std::uint32_t>(id.size()));
        w.Bytes(id);
    }
    for (const auto& [term, list] : postings_) {
        w.U32(static_cast<std::uint32_t>(term));
        w.F32(list.scale);
        w.U32(static_cast<std::uint32_t>(list.refs.size()));
        std::uint32_t prev = 0;
        for (std::size_t i = 0; i < list.refs.size(); ++i) {
            w.Varint(list.refs[i] - prev);
            w.U8(list.levels[i]);
            prev = list.refs[i];
        }
    }
    return w.str();
}

ImpactIndex
ImpactIndex::Parse(std::string_view bytes, const std::string& what) {
    ByteReader r(bytes, what);
    if (bytes.size() < kMagic.size() || r.Bytes(kMagic.size()) != kMagic) {
        Throw(ErrorCode::FormatError, what + ": bad magic, not an impact index");
    }
    const std::uint32_t version = r.U32();
    if (version != kIndexVersion) {
        Throw(ErrorCode::FormatError,
              fmt::format("{}: index version {} is not supported (expected version {})", what, version,
                          kIndexVersion));
    }
    const std::uint32_t term_count = r.U32();
    const std::uint32_t doc_count = r.U32();
    IndexMeta meta;
    meta.model_digest = r.U64();
    const std::uint8_t mode = r.U8();
    if (mode > 1) {
        Throw(ErrorCode::FormatError, fmt::format("{}: unknown expansion mode {}", what, mode));
    }
    meta.mode = static_cast<ExpansionMode>(mode);
    meta.threshold = r.F32();

    std::vector<std::string> doc_ids;
    doc_ids.reserve(std::min<std::size_t>(doc_count, bytes.size()));
    for (std::uint32_t i = 0; i < doc_count; ++i) {
        doc_ids.emplace_back(r.Bytes(r.U32()));
    }
    std::map<TermId, PostingList> postings;
    std::int64_t last_term = -1;
    for (std::uint32_t t = 0; t < term_count; ++t) {
        const std::uint32_t term = r.U32();
        if (static_cast<std::int64_t>(term) <= last_term || term < static_cast<std::uint32_t>(corpus::kFirstTerm) ||
            term > static_cast<std::uint32_t>(std::numeric_limits<TermId>::max())) {
            Throw(ErrorCode::FormatError, fmt::format("{}: term id {} out of order or out of range", what, term));
        }
        last_term = term;
        PostingList list;
        list.scale = r.F32();
        if (!(list.scale > 0.0f) || !std::isfinite(list.scale)) {
            Throw(ErrorCode::FormatError, fmt::format("{}: term {} has scale {}", what, term, list.scale));
        }
        const std::uint32_t count = r.U32();
        if (count == 0 || count > doc_count) {
            Throw(ErrorCode::FormatError, fmt::format("{}: term {} has {} postings", what, term, count));
        }
        std::uint64_t ref = 0;
        for (std::uint32_t i = 0; i < count; ++i) {
            const std::uint64_t delta = r.Varint();
            if (i > 0 && delta == 0) {
                Throw(ErrorCode::FormatError, fmt::format("{}: term {} postings are not ascending", what, term));
            }
            ref += delta;
            if (ref >= doc_count) {
                Throw(ErrorCode::FormatError, fmt::format("{}: term {} refers to document {}", what, term, ref));
            }
            const std::uint8_t level = r.U8();
            if (level == 0) {
                Throw(ErrorCode::FormatError, fmt::format("{}: term {} stores a zero impact", what, term));
            }
            list.refs.push_back(static_cast<std::uint32_t>(ref));
            list.levels.push_back(level);
        }
        postings.emplace(static_cast<TermId>(term), std::move(list));
    }
    if (!r.AtEnd()) {
        Throw(ErrorCode::FormatError, what + ": trailing bytes after the last posting list");
    }
    return ImpactIndex(meta, std::move(doc_ids), std::move(postings));
}

void
ImpactIndex::Save(const std::string& path) const {
    WriteFileAtomic(path, Serialize());
}

ImpactIndex
ImpactIndex::Load(const std::string& path) {
    return Parse(ReadFileBytes(path), path);
}

ImpactIndex
BuildIndex(const std::vector<std::string>& doc_ids,
           const std::vector<std::vector<TermId>>& doc_tokens,
           const ndrm::ModelParams<float>& params,
           const ndrm::ModelConfig& model_config,
           const corpus::Vocabulary& vocab,
           const IndexConfig& config,
           std::uint64_t model_digest) {
    if (doc_ids.empty()) {
        Throw(ErrorCode::EmptyCorpus, "cannot index an empty collection");
    }
    if (doc_ids.size() != doc_tokens.size()) {
        Throw(ErrorCode::InvalidArgument, "doc ids and token lists differ in length");
    }
    std::vector<std::vector<TermImpact>> scored(doc_ids.size());
    auto score = [&](std::size_t d) {
        try {
            ndrm::DocumentScorer<float> scorer(params, model_config, vocab, doc_tokens[d]);
            scored[d] = ScoreDocumentTerms(scorer, doc_tokens[d], vocab, config.mode, config.threshold);
        } catch (const Error& e) {
            Throw(e.code(), fmt::format("document {}: {}", doc_ids[d], e.what()));
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, doc_ids.size()));
    if (workers == 1) {
        for (std::size_t d = 0; d < doc_ids.size(); ++d) {
            score(d);
        }
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    for (std::size_t d = w; d < doc_ids.size(); d += workers) {
                        score(d);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    std::map<TermId, PostingList> postings;
    for (std::size_t d = 0; d < scored.size(); ++d) {
        for (const TermImpact& ti : scored[d]) {
            PostingList& list = postings[ti.term];
            list.refs.push_back(static_cast<std::uint32_t>(d));
            list.exact.push_back(ti.impact);
        }
    }
    for (auto& [term, list] : postings) {
        const float term_max = *std::max_element(list.exact.begin(), list.exact.end());
        list.scale = QuantScale(term_max);
        for (float x : list.exact) {
            list.levels.push_back(Quantize(x, term_max));
        }
    }
    IndexMeta meta{model_digest, config.mode, config.threshold};
    return ImpactIndex(meta, doc_ids, std::move(postings));
}

std::vector<eval::ScoredDoc>
Rerank(const ndrm::ModelParams<float>& params,
       const ndrm::ModelConfig& model_config,
       const corpus::Vocabulary& vocab,
       const std::vector<std::string>& doc_ids,
       const std::vector<std::vector<TermId>>& doc_tokens,
       std::span<const TermId> query,
       const std::vector<std::string>& candidates) {
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        index.emplace(doc_ids[i], i);
    }
    std::vector<std::size_t> refs;
    for (const auto& c : candidates) {
        auto it = index.find(c);
        if (it == index.end()) {
            Throw(ErrorCode::UnknownDocument, fmt::format("candidate document '{}' is not in the collection", c));
        }
        refs.push_back(it->second);
    }
    std::vector<eval::ScoredDoc> out;
    for (std::size_t ref : refs) {
        ndrm::DocumentScorer<float> scorer(params, model_config, vocab, doc_tokens[ref]);
        out.push_back(eval::ScoredDoc{doc_ids[ref], static_cast<double>(scorer.QueryScore(query))});
    }
    std::sort(out.begin(), out.end(), Better);
    return out;
}

double
KendallTau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        Throw(ErrorCode::ShapeMismatch, "Kendall tau needs paired lists");
    }
    double concordant = 0.0, discordant = 0.0, ties_a = 0.0, ties_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) {
                continue;
            }
            if (da == 0.0) {
                ties_a += 1.0;
            } else if (db == 0.0) {
                ties_b += 1.0;
            } else if ((da > 0.0) == (db > 0.0)) {
                concordant += 1.0;
            } else {
                discordant += 1.0;
            }
        }
    }
    const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
    return denom > 0.0 ? (concordant - discordant) / denom : 1.0;
}

}  // namespace ckir::index
