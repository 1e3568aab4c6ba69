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


#include <algorithm>
#include <set>

#include "../test_util.hpp"
#include "ckir/common/io.hpp"
#include "ckir/synth/synthetic.hpp"
#include "doctest.h"

using namespace ckir;
using namespace ckir::synth;
using ckir::testing::CaptureError;

namespace {

SynthConfig
Small() {
    SynthConfig c;
    c.num_docs = 60;
    c.num_topics = 5;
    c.filler_terms = 20;
    c.min_doc_len = 10;
    c.max_doc_len = 18;
    c.seed = 21;
    return c;
}

}  // namespace

TEST_CASE("generation is deterministic") {
    const auto a = Generate(Small());
    const auto b = Generate(Small());
    REQUIRE(a.docs.size() == b.docs.size());
    for (std::size_t i = 0; i < a.docs.size(); ++i) {
        CHECK(a.docs[i].title == b.docs[i].title);
        CHECK(a.docs[i].body == b.docs[i].body);
    }
    CHECK(a.qrels == b.qrels);
    CHECK(a.candidates == b.candidates);
    SynthConfig other = Small();
    other.seed = 22;
    CHECK(Generate(other).qrels != a.qrels);
}

TEST_CASE("documents and queries") {
    const SynthConfig cfg = Small();
    const auto s = Generate(cfg);
    CHECK(s.docs.size() == cfg.num_docs);
    CHECK(s.docs[0].doc_id == "D00000");

    std::set<std::string> terms;
    for (const auto& d : s.docs) {
        const auto words = corpus::Tokenize(d.title + " " + d.body);
        CHECK(words.size() >= cfg.min_doc_len);
        terms.insert(words.begin(), words.end());
        CHECK(d.click_queries.empty());
    }
    // canonical, synonym and filler terms only
    CHECK(terms.size() <= cfg.num_topics * cfg.concepts_per_topic * 2 + cfg.filler_terms);

    // four concepts give six pairs and four triples per topic
    const std::size_t total = s.train_queries.size() + s.test_queries.size();
    CHECK(total <= cfg.num_topics * 10);
    CHECK(!s.test_queries.empty());
    CHECK(s.qrels.size() == total);

    std::set<std::string> train_ids;
    for (const auto& q : s.train_queries) {
        train_ids.insert(q.query_id);
    }
    for (const auto& q : s.test_queries) {
        CHECK(train_ids.count(q.query_id) == 0);
        const auto& cands = s.candidates.at(q.query_id);
        CHECK(cands.size() == std::min(cfg.rerank_depth, cfg.num_docs));
        CHECK(std::set<std::string>(cands.begin(), cands.end()).size() == cands.size());
    }
    for (const auto& [qid, judged] : s.qrels) {
        int best = 0;
        for (const auto& [doc, grade] : judged) {
            CHECK(grade >= 0);
            CHECK(grade <= 3);
            best = std::max(best, grade);
        }
        CHECK(best > 0);
    }
}

TEST_CASE("grades follow concept mentions") {
    SynthConfig cfg = Small();
    cfg.synonym_doc_rate = 0.0;
    cfg.synonym_mention_rate = 0.0;
    const auto s = Generate(cfg);
    std::map<std::string, std::string> text;
    for (const auto& d : s.docs) {
        text[d.doc_id] = " " + d.title + " " + d.body + " ";
    }
    for (const auto& q : s.train_queries) {
        const auto qterms = corpus::Tokenize(q.text);
        for (const auto& [doc, grade] : s.qrels.at(q.query_id)) {
            int mentioned = 0;
            for (const auto& t : qterms) {
                mentioned += text[doc].find(" " + t + " ") != std::string::npos ? 1 : 0;
            }
            // stray mentions from other topics can only add matches
            CHECK(mentioned >= grade);
        }
    }
}

TEST_CASE("clicks") {
    const auto s = Generate(Small());
    const auto with = WithClicks(s);
    std::size_t attached = 0;
    for (const auto& d : with.docs()) {
        attached += d.click_queries.size();
    }
    CHECK(attached == s.clicks.size());
    CHECK(!s.clicks.empty());
    for (const auto& d : WithoutClicks(s).docs()) {
        CHECK(d.click_queries.empty());
    }
}

TEST_CASE("files") {
    ckir::testing::TempDir dir;
    const auto s = Generate(Small());
    WriteSynthCorpus(s, dir.File("out"));
    auto docs = corpus::ReadDocuments(dir.File("out/docs.tsv"));
    CHECK(docs.size() == s.docs.size());
    CHECK(corpus::AttachClicks(dir.File("out/clicks.tsv"), docs) == s.clicks.size());
    CHECK(corpus::ReadQueries(dir.File("out/test_queries.tsv")).size() == s.test_queries.size());
    auto qrels = eval::ReadQrels(dir.File("out/train_qrels.txt"));
    CHECK(qrels.size() == s.train_queries.size());
    qrels.merge(eval::ReadQrels(dir.File("out/test_qrels.txt")));
    CHECK(qrels == s.qrels);
    const std::string cands = ReadFileBytes(dir.File("out/candidates.tsv"));
    CHECK(std::count(cands.begin(), cands.end(), '\n') ==
          static_cast<std::ptrdiff_t>(s.test_queries.size() * std::min(Small().rerank_depth, Small().num_docs)));
}

TEST_CASE("bad configuration") {
    SynthConfig c = Small();
    c.num_docs = 0;
    CHECK(CaptureError([&] { Generate(c); }) == ErrorCode::InvalidArgument);
    c = Small();
    c.click_rate = 1.5;
    CHECK(CaptureError([&] { Generate(c); }) == ErrorCode::InvalidArgument);
    c = Small();
    c.max_doc_len = 2;
    CHECK(CaptureError([&] { Generate(c); }) == ErrorCode::InvalidArgument);
}
