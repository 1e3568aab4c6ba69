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

#include <span>
#include <string>
#include <vector>

#include "ckir/eval/trec.hpp"

namespace ckir::eval {

// `ranked` holds the grades of the retrieved documents in rank order
// (unjudged = 0); `judged` holds the grades of every judged document of the
// query, in any order.

/// Linear gain, log2(i + 1) discount; 0 when the ideal DCG is 0.
double
NdcgAt(std::span<const int> ranked, std::span<const int> judged, std::size_t k);

/// Undiscounted gain of the top k over that of the ideal top k.
double
NcgAt(std::span<const int> ranked, std::span<const int> judged, std::size_t k);

/// Grades >= threshold count as relevant. Normalised by all relevant judged
/// documents, retrieved or not.
double
AveragePrecision(std::span<const int> ranked, std::span<const int> judged, std::size_t k, int threshold = 1);

double
ReciprocalRank(std::span<const int> ranked, std::size_t k, int threshold = 1);

struct QueryMetrics {
    std::string query_id;
    double ndcg10 = 0.0;
    double ncg100 = 0.0;
    double ap100 = 0.0;
    double rr100 = 0.0;
};

struct EvalReport {
    std::vector<QueryMetrics> queries;  // qrels order
    QueryMetrics mean;                  // query_id "ALL"
};

/// Evaluates every query of `qrels`; run queries without judgments are
/// ignored and judged queries missing from the run score 0. Rankings are
/// re-sorted by (score desc, doc_id desc) first.
EvalReport
EvaluateRun(const Run& run, const Qrels& qrels, int threshold = 1);

/// query_id,ndcg10,ncg100,ap100,rr100 rows followed by the ALL row.
std::string
FormatReport(const EvalReport& report);

}  // namespace ckir::eval
