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

// Synthetic collection with planted term-overlap relevance.
//
// Every topic owns `concepts_per_topic` concepts. A concept is written either
// as its canonical term ("c<topic>x<j>") or as its synonym ("s<topic>x<j>").
// A document belongs to one topic and mentions a random subset of its
// concepts among filler words ("w<i>"); some documents are written entirely
// in synonyms, and the others swap single mentions with a small probability.
// Queries are sets of canonical terms of one topic. A document's grade for a
// query is the number of the query's concepts it mentions in either form
// (capped at 3), and 0 outside the query's topic. Click queries, when
// enabled, carry canonical terms of concepts a document mentions.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ckir/corpus/corpus.hpp"
#include "ckir/eval/trec.hpp"

namespace ckir::synth {

struct SynthConfig {
    std::size_t num_docs = 300;
    std::size_t num_topics = 20;
    std::size_t concepts_per_topic = 4;
    std::size_t filler_terms = 80;
    std::size_t min_doc_len = 20;
    std::size_t max_doc_len = 40;
    /// Share of documents written in synonyms only.
    double synonym_doc_rate = 0.3;
    /// Per-mention synonym swap in the other documents.
    double synonym_mention_rate = 0.1;
    /// Share of documents that carry click queries.
    double click_rate = 0.7;
    /// Queries per topic are every concept subset of size 2 and 3; this share
    /// of them is held out for testing.
    double test_fraction = 0.3;
    /// Candidates per test query for reranking.
    std::size_t rerank_depth = 100;
    std::uint64_t seed = 7;

    /// InvalidArgument on empty sizes, rates outside [0, 1] or fewer than two
    /// concepts per topic.
    void
    Validate() const;
};

struct ClickRecord {
    std::string query_id;
    std::string text;
    std::string doc_id;
};

struct SynthCorpus {
    /// Documents without click fields; see `clicks`.
    std::vector<corpus::Document> docs;
    std::vector<ClickRecord> clicks;
    std::vector<corpus::Query> train_queries;
    std::vector<corpus::Query> test_queries;
    /// Judgments for train and test queries: every document of the query's
    /// topic is judged.
    eval::Qrels qrels;
    /// test query_id -> candidate doc ids: the judged documents first, padded
    /// with random others up to rerank_depth.
    std::map<std::string, std::vector<std::string>> candidates;
};

SynthCorpus
Generate(const SynthConfig& config);

/// Copies the corpus with every click record attached to its document.
corpus::Corpus
WithClicks(const SynthCorpus& synth);
corpus::Corpus
WithoutClicks(const SynthCorpus& synth);

/// Restricts qrels to the given queries.
eval::Qrels
QrelsFor(const eval::Qrels& qrels, const std::vector<corpus::Query>& queries);

/// Writes docs.tsv, clicks.tsv, train_queries.tsv, test_queries.tsv,
/// train_qrels.txt, test_qrels.txt and candidates.tsv into `dir` (created if
/// missing).
void
WriteSynthCorpus(const SynthCorpus& synth, const std::string& dir);

}  // namespace ckir::synth
