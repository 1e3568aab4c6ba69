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

// TREC exchange formats.
//
//   qrels: query_id 0 doc_id grade
//   run:   query_id Q0 doc_id rank score run_tag   (score with 6 decimals)

#pragma once

#include <map>
#include <string>
#include <vector>

namespace ckir::eval {

inline constexpr int kDefaultMaxGrade = 3;

/// query_id -> doc_id -> grade
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

/// One ranked list per query, in rank order.
struct Run {
    std::string tag = "ckir";
    std::map<std::string, std::vector<ScoredDoc>> rankings;
};

/// Sorts by score descending, ties by doc_id descending.
void
SortRanking(std::vector<ScoredDoc>& ranking);

/// FormatError with the line number on a malformed line, a grade outside
/// [0, max_grade] or a repeated (query, doc) pair; IoError if unreadable.
Qrels
ReadQrels(const std::string& path, int max_grade = kDefaultMaxGrade);

std::string
FormatQrels(const Qrels& qrels);

/// Rankings keep file order. FormatError with the line number on a line that
/// does not have six fields or carries a bad rank or score.
Run
ReadRun(const std::string& path);

/// Ranks are written 1..m in list order.
std::string
FormatRun(const Run& run);

void
WriteRun(const std::string& path, const Run& run);

/// `query_id<TAB>doc_id` lines, grouped per query in file order. FormatError
/// with the line number on a malformed line or a repeated pair.
std::map<std::string, std::vector<std::string>>
ReadCandidates(const std::string& path);

}  // namespace ckir::eval
