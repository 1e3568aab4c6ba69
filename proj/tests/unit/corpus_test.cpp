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
#include <cmath>
#include <optional>
#include <random>

#include "../test_util.hpp"
#include "ckir/corpus/vocabulary.hpp"
#include "doctest.h"

using namespace ckir;
using namespace ckir::corpus;
using ckir::testing::CaptureError;
using ckir::testing::TempDir;

namespace {

Document
Doc(std::string id, std::string body, std::string title = "", std::vector<std::string> clicks = {}) {
    return Document{std::move(id), "", std::move(title), std::move(body), std::move(clicks)};
}

std::string
Join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) {
            out += ' ';
        }
        out += t;
    }
    return out;
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(Tokenize("who is Aziz Hashim?") == std::vector<std::string>{"who", "is", "aziz", "hashim"});
    CHECK(Tokenize("").empty());
    CHECK(Tokenize("pete  rose,") == std::vector<std::string>{"pete", "rose"});
    CHECK(Tokenize("  ... !! ").empty());
    CHECK(Tokenize("(u.s.a)") == std::vector<std::string>{"u.s.a"});
    // NBSP and ideographic space separate tokens
    CHECK(Tokenize("a\xC2\xA0" "b\xE3\x80\x80" "c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(Tokenize("tab\tand\nnewline") == std::vector<std::string>{"tab", "and", "newline"});
}

TEST_CASE("tokenize is idempotent on its joined output") {
    std::mt19937_64 rng(5);
    const std::string alphabet = "abcXYZ09 .,;!?'\"()-\t\n";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<std::size_t> len(0, 40);
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        for (std::size_t i = len(rng); i > 0; --i) {
            s += alphabet[pick(rng)];
        }
        const auto once = Tokenize(s);
        CHECK(Tokenize(Join(once)) == once);
    }
}

TEST_CASE("build vocabulary") {
    const std::vector<Document> docs{Doc("d1", "a a b"), Doc("d2", "a c")};
    SUBCASE("min_df 1") {
        const auto v = Vocabulary::Build(docs, 1, {});
        CHECK(v.size() == 3);
        CHECK(v.num_docs() == 2);
        CHECK(v.df(v.Id("a")) == 2);
        CHECK(v.df(v.Id("b")) == 1);
        CHECK(v.df(v.Id("c")) == 1);
        CHECK(v.avgdl() == doctest::Approx(2.5));
        // contiguous ids from 2
        CHECK(v.Id("a") == 2);
        CHECK(v.Id("b") == 3);
        CHECK(v.Id("c") == 4);
        CHECK(v.Id("zzz") == kUnk);
    }
    SUBCASE("min_df 2") {
        const auto v = Vocabulary::Build(docs, 2, {});
        CHECK(v.size() == 1);
        CHECK(v.Id("a") == 2);
        CHECK(v.Id("b") == kUnk);
    }
    SUBCASE("empty corpus") {
        CHECK(CaptureError([] { Vocabulary::Build({}, 1, {}); }) == ErrorCode::EmptyCorpus);
    }
}

TEST_CASE("vocabulary invariants on random corpora") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> word(0, 30);
    std::uniform_int_distribution<int> len(1, 25);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Document> docs;
        for (int d = 0; d < 10; ++d) {
            std::string body;
            for (int i = len(rng); i > 0; --i) {
                body += "w" + std::to_string(word(rng)) + " ";
            }
            docs.push_back(Doc("d" + std::to_string(d), body));
        }
        const auto v = Vocabulary::Build(docs, 1 + trial % 3, {});
        CHECK(v.avgdl() > 0.0);
        for (TermId id = kFirstTerm; id < static_cast<TermId>(v.table_size()); ++id) {
            CHECK(v.df(id) >= 1 + static_cast<unsigned>(trial % 3));
            CHECK(v.df(id) <= v.num_docs());
            CHECK(v.Id(v.Term(id)) == id);
        }
    }
}

TEST_CASE("idf") {
    const auto two = Vocabulary::Build(std::vector<Document>{Doc("d1", "a"), Doc("d2", "a")}, 1, {});
    CHECK(two.Idf("a") == doctest::Approx(std::log(1.2)).epsilon(1e-12));
    CHECK(two.Idf("a") == doctest::Approx(0.18232).epsilon(1e-4));
    CHECK(two.Idf("unknown") == doctest::Approx(std::log(6.0)).epsilon(1e-12));
    const auto one = Vocabulary::Build(std::vector<Document>{Doc("d1", "a")}, 1, {});
    CHECK(one.Idf("a") == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("flatten") {
    const std::vector<Document> docs{Doc("d1", "b c", "a", {"a"}), Doc("d2", "c")};
    const auto v = Vocabulary::Build(docs, 1, {});
    const TermId a = v.Id("a"), b = v.Id("b"), c = v.Id("c");

    SUBCASE("fields joined by single PAD separators") {
        const Document d = Doc("x", "b c", "a");
        CHECK(Flatten(d, v, {10, 20}) == std::vector<TermId>{a, kPad, b, c});
    }
    SUBCASE("click queries follow the body") {
        CHECK(Flatten(docs[0], v, {10, 20}) == std::vector<TermId>{a, kPad, b, c, kPad, a});
    }
    SUBCASE("unknown terms become UNK") {
        CHECK(Flatten(Doc("x", "b nope"), v, {10, 20}) == std::vector<TermId>{b, kUnk});
    }
    SUBCASE("truncation") {
        std::string body;
        for (int i = 0; i < 10000; ++i) {
            body += "c ";
        }
        CHECK(Flatten(Doc("x", body), v, {1024, 20}).size() == 1024);
    }
    SUBCASE("query truncation") {
        CHECK(EncodeQuery("a b c a b c", v, {10, 4}) == std::vector<TermId>{a, b, c, a});
    }
}

TEST_CASE("flatten properties on random documents") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> word(0, 12);
    std::uniform_int_distribution<int> len(0, 8);
    auto text = [&] {
        std::string s;
        for (int i = len(rng); i > 0; --i) {
            s += "t" + std::to_string(word(rng)) + " ";
        }
        return s;
    };
    std::vector<Document> docs;
    for (int d = 0; d < 30; ++d) {
        Document doc{"d" + std::to_string(d), text(), text(), text() + "x", {text(), text()}};
        docs.push_back(doc);
    }
    const auto v = Vocabulary::Build(docs, 2, {});
    for (const auto& doc : docs) {
        const auto ids = Flatten(doc, v, {64, 20});
        for (TermId id : ids) {
            CHECK(id >= 0);
            CHECK(static_cast<std::size_t>(id) < v.table_size());
        }
        Document without = doc;
        without.click_queries.clear();
        const auto prefix = Flatten(without, v, {64, 20});
        REQUIRE(prefix.size() <= ids.size());
        CHECK(std::equal(prefix.begin(), prefix.end(), ids.begin()));
    }
}

TEST_CASE("readers") {
    TempDir dir;
    SUBCASE("documents and clicks") {
        const auto docs = dir.Write("docs.tsv", "d1\thttp://x\tTitle One\tbody text\nd2\t\t\tsecond\n");
        const auto clicks = dir.Write("clicks.tsv", "q1\tfirst query\td1\nq2\tother\tmissing\nq3\tmore\td1\n");
        Corpus c = ReadDocuments(docs);
        REQUIRE(c.size() == 2);
        CHECK(c.docs()[0].title == "Title One");
        CHECK(AttachClicks(clicks, c) == 2);
        CHECK(c.docs()[0].click_queries == std::vector<std::string>{"first query", "more"});
        CHECK(c.Find("d2") == std::optional<std::size_t>(1));
        CHECK(!c.Find("d3").has_value());
    }
    SUBCASE("malformed document line names the line") {
        const auto docs = dir.Write("bad.tsv", "d1\tu\tt\tb\nd2\tonly-two\n");
        std::string msg;
        CHECK(CaptureError([&] { ReadDocuments(docs); }, &msg) == ErrorCode::FormatError);
        CHECK(msg.find("bad.tsv:2") != std::string::npos);
    }
    SUBCASE("duplicate doc ids") {
        const auto docs = dir.Write("dup.tsv", "d1\tu\tt\tb\nd1\tu\tt\tb\n");
        CHECK(CaptureError([&] { ReadDocuments(docs); }) == ErrorCode::FormatError);
    }
    SUBCASE("queries") {
        const auto q = dir.Write("q.tsv", "1\thello world\n2\tsecond\n");
        const auto queries = ReadQueries(q);
        REQUIRE(queries.size() == 2);
        CHECK(queries[1].query_id == "2");
        const auto bad = dir.Write("qbad.tsv", "1\ta\tb\n");
        CHECK(CaptureError([&] { ReadQueries(bad); }) == ErrorCode::FormatError);
    }
    SUBCASE("missing file") {
        CHECK(CaptureError([&] { ReadDocuments(dir.File("nope.tsv")); }) == ErrorCode::IoError);
    }
}

TEST_CASE("vocabulary save and load") {
    TempDir dir;
    const std::vector<Document> docs{Doc("d1", "alpha beta beta"), Doc("d2", "beta gamma"), Doc("d3", "delta")};
    const auto v = Vocabulary::Build(docs, 1, {});
    v.Save(dir.File("vocab.tsv"));
    const auto back = Vocabulary::Load(dir.File("vocab.tsv"));
    CHECK(back == v);
    CHECK(back.Id("gamma") == v.Id("gamma"));
    CHECK(back.Idf("beta") == v.Idf("beta"));

    dir.Write("bad.tsv", "#ckir-vocab\t2\t1.5\nalpha\t3\t1\n");
    CHECK(CaptureError([&] { Vocabulary::Load(dir.File("bad.tsv")); }) == ErrorCode::FormatError);
}
