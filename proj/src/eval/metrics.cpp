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

#include "ckir/eval/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>

namespace ckir::eval {

namespace {

std::vector<int>
IdealOrder(std::span<const int> judged) {
    std::vector<int> ideal(judged.begin(), judged.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    return ideal;
}

double
Dcg(std::span<const int> grades, std::size_t k) {
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
        dcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg;
}

double
Cg(std::span<const int> grades, std::size_t k) {
    double cg = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
        cg += grades[i];
    }
    return cg;
}

}  // namespace

double
NdcgAt(std::span<const int> ranked, std::span<const int> judged, std::size_t k) {
    const double ideal = Dcg(IdealOrder(judged), k);
    return ideal > 0.0 ? Dcg(ranked, k) / ideal : 0.0;
}

double
NcgAt(std::span<const int> ranked, std::span<const int> judged, std::size_t k) {
    const double ideal = Cg(IdealOrder(judged), k);
    return ideal > 0.0 ? Cg(ranked, k) / ideal : 0.0;
}

double
AveragePrecision(std::span<const int> ranked, std::span<const int> judged, std::size_t k, int threshold) {
    const auto relevant = std::count_if(judged.begin(), judged.end(), [&](int g) { return g >= threshold; });
    if (relevant == 0) {
        return 0.0;
    }
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (ranked[i] >= threshold) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant);
}

double
ReciprocalRank(std::span<const int> ranked, std::size_t k, int threshold) {
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (ranked[i] >= threshold) {
            return 1.0 / static_cast<double>(i + 1);
        }
    }
    return 0.0;
}

EvalReport
EvaluateRun(const Run& run, const Qrels& qrels, int threshold) {
    EvalReport report;
    report.mean.query_id = "ALL";
    for (const auto& [qid, judgments] : qrels) {
        std::vector<int> judged;
        for (const auto& [doc, grade] : judgments) {
            judged.push_back(grade);
        }
        std::vector<int> ranked;
        if (auto it = run.rankings.find(qid); it != run.rankings.end()) {
            std::vector<ScoredDoc> ranking = it->second;
            SortRanking(ranking);
            for (const auto& d : ranking) {
                auto g = judgments.find(d.doc_id);
                ranked.push_back(g == judgments.end() ? 0 : g->second);
            }
        }
        QueryMetrics m;
        m.query_id = qid;
        m.ndcg10 = NdcgAt(ranked, judged, 10);
        m.ncg100 = NcgAt(ranked, judged, 100);
        m.ap100 = AveragePrecision(ranked, judged, 100, threshold);
        m.rr100 = ReciprocalRank(ranked, 100, threshold);
        report.mean.ndcg10 += m.ndcg10;
        report.mean.ncg100 += m.ncg100;
        report.mean.ap100 += m.ap100;
        report.mean.rr100 += m.rr100;
        report.queries.push_back(std::move(m));
    }
    if (!report.queries.empty()) {
        const double n = static_cast<double>(report.queries.size());
        report.mean.ndcg10 /= n;
        report.mean.ncg100 /= n;
        report.mean.ap100 /= n;
        report.mean.rr100 /= n;
    }
    return report;
}

std::string
FormatReport(const EvalReport& report) {
    std::string out = "query_id,ndcg10,ncg100,ap100,rr100\n";
    auto row = [&](const QueryMetrics& m) {
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", m.query_id, m.ndcg10, m.ncg100, m.ap100, m.rr100);
    };
    for (const auto& m : report.queries) {
        row(m);
    }
    row(report.mean);
    return out;
}

}  // namespace ckir::eval
