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

#include "ckir/eval/trec.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "ckir/common/error.hpp"
#include "ckir/common/io.hpp"

namespace ckir::eval {

namespace {

template <typename N>
bool
ParseNumber(std::string_view s, N& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

void
SortRanking(std::vector<ScoredDoc>& ranking) {
    std::stable_sort(ranking.begin(), ranking.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.doc_id > b.doc_id;
    });
}

Qrels
ReadQrels(const std::string& path, int max_grade) {
    LineReader reader(path);
    Qrels qrels;
    std::string line;
    while (reader.Next(line)) {
        const auto f = SplitWhitespace(line);
        if (f.empty()) {
            continue;
        }
        if (f.size() != 4) {
            ThrowFormat(path, reader.line_no(), fmt::format("expected 4 fields, found {}", f.size()));
        }
        int grade = 0;
        if (!ParseNumber(f[3], grade) || grade < 0 || grade > max_grade) {
            ThrowFormat(path, reader.line_no(),
                        fmt::format("grade '{}' is not an integer in [0, {}]", f[3], max_grade));
        }
        auto& judged = qrels[std::string(f[0])];
        if (!judged.emplace(std::string(f[2]), grade).second) {
            ThrowFormat(path, reader.line_no(), fmt::format("repeated judgment for {} {}", f[0], f[2]));
        }
    }
    return qrels;
}

std::string
FormatQrels(const Qrels& qrels) {
    std::string out;
    for (const auto& [qid, judged] : qrels) {
        for (const auto& [doc, grade] : judged) {
            out += fmt::format("{} 0 {} {}\n", qid, doc, grade);
        }
    }
    return out;
}

Run
ReadRun(const std::string& path) {
    LineReader reader(path);
    Run run;
    bool tagged = false;
    std::string line;
    while (reader.Next(line)) {
        const auto f = SplitWhitespace(line);
        if (f.empty()) {
            continue;
        }
        if (f.size() != 6) {
            ThrowFormat(path, reader.line_no(), fmt::format("expected 6 fields, found {}", f.size()));
        }
        long rank = 0;
        if (!ParseNumber(f[3], rank) || rank < 1) {
            ThrowFormat(path, reader.line_no(), fmt::format("rank '{}' is not a positive integer", f[3]));
        }
        double score = 0.0;
        if (!ParseNumber(f[4], score) || !std::isfinite(score)) {
            ThrowFormat(path, reader.line_no(), fmt::format("score '{}' is not a finite number", f[4]));
        }
        if (!tagged) {
            run.tag = std::string(f[5]);
            tagged = true;
        }
        run.rankings[std::string(f[0])].push_back(ScoredDoc{std::string(f[2]), score});
    }
    return run;
}

std::string
FormatRun(const Run& run) {
    std::string out;
    for (const auto& [qid, ranking] : run.rankings) {
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            out += fmt::format("{} Q0 {} {} {:.6f} {}\n", qid, ranking[i].doc_id, i + 1, ranking[i].score, run.tag);
        }
    }
    return out;
}

void
WriteRun(const std::string& path, const Run& run) {
    WriteFileAtomic(path, FormatRun(run));
}

std::map<std::string, std::vector<std::string>>
ReadCandidates(const std::string& path) {
    LineReader reader(path);
    std::map<std::string, std::vector<std::string>> out;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    while (reader.Next(line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = SplitTabs(line);
        if (f.size() != 2 || f[0].empty() || f[1].empty()) {
            ThrowFormat(path, reader.line_no(), "expected query_id<TAB>doc_id");
        }
        if (!seen.emplace(std::string(f[0]), std::string(f[1])).second) {
            ThrowFormat(path, reader.line_no(), fmt::format("repeated candidate {} for {}", f[1], f[0]));
        }
        out[std::string(f[0])].emplace_back(f[1]);
    }
    return out;
}

}  // namespace ckir::eval
