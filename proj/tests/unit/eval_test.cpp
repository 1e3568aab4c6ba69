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

#include <cmath>
#include <random>

#include "../fixtures/metric_fixture.hpp"
#include "../test_util.hpp"
#include "ckir/common/io.hpp"
#include "ckir/eval/metrics.hpp"
#include "doctest.h"

using namespace ckir;
using namespace ckir::eval;
using ckir::testing::CaptureError;
using ckir::testing::TempDir;

namespace {

using Grades = std::vector<int>;

}  // namespace

TEST_CASE("ndcg") {
    CHECK(NdcgAt(Grades{1, 3}, Grades{3, 1}, 10) ==
          doctest::Approx((1.0 + 3.0 / std::log2(3.0)) / (3.0 + 1.0 / std::log2(3.0))).epsilon(1e-12));
    CHECK(NdcgAt(Grades{1, 3}, Grades{3, 1}, 10) == doctest::Approx(0.7967).epsilon(1e-4));
    CHECK(NdcgAt(Grades{3, 2, 1}, Grades{1, 2, 3}, 10) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(NdcgAt(Grades{0, 0, 0}, Grades{2, 1}, 10) == 0.0);
    CHECK(NdcgAt(Grades{}, Grades{0, 0}, 10) == 0.0);
}

TEST_CASE("ncg") {
    CHECK(NcgAt(Grades{3, 1}, Grades{3, 2, 1}, 100) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
    CHECK(NcgAt(Grades{1}, Grades{0}, 100) == 0.0);
    CHECK(NcgAt(Grades{0, 1, 0, 2}, Grades{2, 1}, 100) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("average precision") {
    CHECK(AveragePrecision(Grades{1, 0, 1}, Grades{1, 1}, 100) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(AveragePrecision(Grades{0, 0}, Grades{1, 1}, 100) == 0.0);
    CHECK(AveragePrecision(Grades{2, 1, 0}, Grades{2, 1, 0}, 100) == doctest::Approx(1.0).epsilon(1e-12));
    // threshold 2 leaves one relevant document
    CHECK(AveragePrecision(Grades{1, 2}, Grades{1, 2}, 100, 2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reciprocal rank") {
    CHECK(ReciprocalRank(Grades{0, 0, 1}, 100) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(ReciprocalRank(Grades{1}, 100) == 1.0);
    Grades late(150, 0);
    late[120] = 3;
    CHECK(ReciprocalRank(late, 100) == 0.0);
    CHECK(ReciprocalRank(Grades{}, 100) == 0.0);
}

TEST_CASE("evaluate the fixture") {
    TempDir dir;
    const Qrels qrels = ReadQrels(dir.Write("qrels.txt", ckir::testing::kFixtureQrels));
    const Run run = ReadRun(dir.Write("run.txt", ckir::testing::kFixtureRun));
    const EvalReport report = EvaluateRun(run, qrels);
    REQUIRE(report.queries.size() == 5);
    for (std::size_t i = 0; i < ckir::testing::kFixtureTable.size(); ++i) {
        const auto& want = ckir::testing::kFixtureTable[i];
        const QueryMetrics& got = i < 5 ? report.queries[i] : report.mean;
        CAPTURE(want.query_id);
        CHECK(got.query_id == want.query_id);
        CHECK(std::abs(got.ndcg10 - want.ndcg10) <= 1e-6);
        CHECK(std::abs(got.ncg100 - want.ncg100) <= 1e-6);
        CHECK(std::abs(got.ap100 - want.ap100) <= 1e-6);
        CHECK(std::abs(got.rr100 - want.rr100) <= 1e-6);
    }
    const std::string csv = FormatReport(report);
    CHECK(csv.rfind("query_id,ndcg10,ncg100,ap100,rr100\n", 0) == 0);
    CHECK(csv.find("\nALL,0.590287,0.733333,0.544444,0.666667\n") != std::string::npos);
}

TEST_CASE("mean over judged queries only") {
    Qrels qrels{{"a", {{"d1", 1}}}, {"b", {{"d1", 1}, {"d2", 1}}}};
    Run run;
    run.rankings["a"] = {{"d1", 1.0}};
    run.rankings["b"] = {{"x", 2.0}, {"d1", 1.0}};
    run.rankings["extra"] = {{"d1", 1.0}};
    const auto report = EvaluateRun(run, qrels);
    REQUIRE(report.queries.size() == 2);
    CHECK(report.queries[0].ndcg10 == doctest::Approx(1.0));
    const double b = (1.0 / std::log2(3.0)) / (1.0 + 1.0 / std::log2(3.0));
    CHECK(report.mean.ndcg10 == doctest::Approx((1.0 + b) / 2.0).epsilon(1e-12));
}

TEST_CASE("metrics depend only on order") {
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<int> grade(0, 3);
    std::uniform_real_distribution<double> score(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        Qrels qrels;
        Run run;
        for (int q = 0; q < 3; ++q) {
            const std::string qid = "q" + std::to_string(q);
            for (int d = 0; d < 30; ++d) {
                const std::string doc = "d" + std::to_string(d);
                if (d % 2 == 0) {
                    qrels[qid][doc] = grade(rng);
                }
                run.rankings[qid].push_back({doc, std::round(score(rng) * 4.0) / 4.0});
            }
        }
        Run shifted = run;
        for (auto& [qid, ranking] : shifted.rankings) {
            for (auto& d : ranking) {
                d.score = std::exp(d.score) * 3.0 + 1.0;
            }
        }
        const auto a = EvaluateRun(run, qrels);
        const auto b = EvaluateRun(shifted, qrels);
        for (std::size_t i = 0; i < a.queries.size(); ++i) {
            for (double v : {a.queries[i].ndcg10, a.queries[i].ncg100, a.queries[i].ap100, a.queries[i].rr100}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0 + 1e-12);
            }
            CHECK(a.queries[i].ndcg10 == b.queries[i].ndcg10);
            CHECK(a.queries[i].ncg100 == b.queries[i].ncg100);
            CHECK(a.queries[i].ap100 == b.queries[i].ap100);
            CHECK(a.queries[i].rr100 == b.queries[i].rr100);
        }
    }
}

TEST_CASE("ndcg rewards promoting the better document") {
    std::mt19937_64 rng(67);
    std::uniform_int_distribution<int> grade(0, 3);
    for (int trial = 0; trial < 200; ++trial) {
        Grades ranked(12);
        for (auto& g : ranked) {
            g = grade(rng);
        }
        for (std::size_t i = 0; i + 1 < ranked.size(); ++i) {
            if (ranked[i] < ranked[i + 1]) {
                Grades swapped = ranked;
                std::swap(swapped[i], swapped[i + 1]);
                CHECK(NdcgAt(swapped, ranked, 10) >= NdcgAt(ranked, ranked, 10));
            }
        }
        // every judged document retrieved: undiscounted gain is complete
        Grades shuffled = ranked;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(NcgAt(shuffled, ranked, 100) == doctest::Approx(ranked == Grades(12, 0) ? 0.0 : 1.0));
    }
}

TEST_CASE("run files") {
    TempDir dir;
    SUBCASE("one result") {
        Run run;
        run.tag = "t";
        run.rankings["7"] = {{"D1", 1.5}};
        CHECK(FormatRun(run) == "7 Q0 D1 1 1.500000 t\n");
    }
    SUBCASE("round trip") {
        Run run;
        run.tag = "tag";
        run.rankings["q1"] = {{"b", 3.25}, {"a", 3.25}, {"c", -0.1234567}};
        run.rankings["q2"] = {{"z", 0.0}};
        const std::string first = FormatRun(run);
        WriteRun(dir.File("r1"), run);
        const Run back = ReadRun(dir.File("r1"));
        CHECK(back.tag == "tag");
        CHECK(back.rankings.at("q1").size() == 3);
        CHECK(back.rankings.at("q1")[1].doc_id == "a");
        CHECK(back.rankings.at("q1")[2].score == doctest::Approx(-0.123457).epsilon(1e-9));
        WriteRun(dir.File("r2"), back);
        CHECK(ReadFileBytes(dir.File("r2")) == first);
    }
    SUBCASE("five fields") {
        const auto p = dir.Write("bad", "q1 Q0 d1 1 2.0\n");
        std::string msg;
        CHECK(CaptureError([&] { ReadRun(p); }, &msg) == ErrorCode::FormatError);
        CHECK(msg.find(p + ":1:") != std::string::npos);
    }
    SUBCASE("bad rank and score") {
        CHECK(CaptureError([&] { ReadRun(dir.Write("r", "q Q0 d x 1.0 t\n")); }) == ErrorCode::FormatError);
        CHECK(CaptureError([&] { ReadRun(dir.Write("s", "q Q0 d 1 nan t\n")); }) == ErrorCode::FormatError);
    }
}

TEST_CASE("qrels files") {
    TempDir dir;
    const Qrels q = ReadQrels(dir.Write("ok", "1 0 a 2\n\n1 0 b 0\n2 0 a 3\n"));
    CHECK(q.at("1").at("a") == 2);
    CHECK(q.at("2").size() == 1);
    CHECK(FormatQrels(q) == "1 0 a 2\n1 0 b 0\n2 0 a 3\n");
    std::string msg;
    CHECK(CaptureError([&] { ReadQrels(dir.Write("g", "1 0 a 2\n1 0 b 4\n")); }, &msg) == ErrorCode::FormatError);
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(CaptureError([&] { ReadQrels(dir.Write("d", "1 0 a 2\n1 0 a 1\n")); }) == ErrorCode::FormatError);
    CHECK(CaptureError([&] { ReadQrels(dir.Write("f", "1 0 a\n")); }) == ErrorCode::FormatError);
    CHECK(CaptureError([&] { ReadQrels(dir.File("missing")); }) == ErrorCode::IoError);
}

TEST_CASE("candidate files") {
    TempDir dir;
    const auto c = ReadCandidates(dir.Write("ok", "q1\tb\nq1\ta\n\nq2\tc\n"));
    CHECK(c.at("q1") == std::vector<std::string>{"b", "a"});
    CHECK(c.at("q2").size() == 1);
    std::string msg;
    CHECK(CaptureError([&] { ReadCandidates(dir.Write("r", "q1\ta\nq1\ta\n")); }, &msg) == ErrorCode::FormatError);
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(CaptureError([&] { ReadCandidates(dir.Write("f", "q1 a\n")); }) == ErrorCode::FormatError);
}
