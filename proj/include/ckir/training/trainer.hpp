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

// Pairwise training: each positively judged (query, document) pair is matched
// with a uniformly drawn negative and the RankNet loss
// log(1 + exp(-(s_pos - s_neg))) is minimised with Adam.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ckir/eval/trec.hpp"
#include "ckir/ndrm/model.hpp"
#include "ckir/numerics/adam.hpp"

namespace ckir::training {

using corpus::TermId;

/// Flattened collection the trainer draws from, in corpus order.
struct TrainingData {
    std::vector<std::string> doc_ids;
    std::vector<std::vector<TermId>> doc_tokens;
    /// query_id -> encoded query
    std::map<std::string, std::vector<TermId>> queries;
    eval::Qrels qrels;
};

/// Flattens every document and encodes every query with `vocab`.
TrainingData
MakeTrainingData(const corpus::Corpus& corpus,
                 const corpus::Vocabulary& vocab,
                 const std::vector<corpus::Query>& queries,
                 eval::Qrels qrels,
                 const corpus::Limits& limits);

struct TrainInstance {
    std::string query_id;
    std::size_t positive = 0;  // index into TrainingData::doc_ids
    std::size_t negative = 0;
};

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
    std::size_t negatives = 1;
    num::AdamConfig adam{};
    /// Worker threads for per-pair gradients; results do not depend on it.
    std::size_t threads = 1;

    /// InvalidArgument unless every count is at least 1 (epochs may be 0).
    void
    Validate() const;
};

/// One epoch of pairs in shuffled order. Every judged query with encoded text
/// contributes, for each document graded > 0 and present in the collection,
/// `negatives` documents drawn uniformly from the non-empty documents not
/// graded > 0 for that query. NoPositives if a query has positives but no
/// possible negative, or if no pair can be formed at all.
std::vector<TrainInstance>
SamplePairs(const TrainingData& data, std::size_t negatives, std::mt19937_64& rng);

/// log(1 + exp(-(s_pos - s_neg)))
double
PairwiseLoss(double s_pos, double s_neg);

template <typename T>
num::Var<T>
PairwiseLoss(num::Var<T> s_pos, num::Var<T> s_neg);

template <typename T>
struct TrainResult {
    ndrm::ModelParams<T> params;
    std::vector<double> epoch_loss;  // mean pair loss per epoch
    std::uint64_t steps = 0;
};

/// Called after each epoch with (epoch starting at 1, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Runs `config.epochs` epochs of SamplePairs batches. The embedding row of
/// PAD stays zero. NonFinite errors are rethrown naming the optimizer step.
template <typename T>
TrainResult<T>
Train(const TrainingData& data,
      const corpus::Vocabulary& vocab,
      const ndrm::ModelConfig& model_config,
      const TrainConfig& config,
      ndrm::ModelParams<T> initial,
      const EpochCallback& on_epoch = {});

/// "epoch,mean_loss" followed by one row per epoch.
std::string
FormatLossHistory(const std::vector<double>& epoch_loss);

}  // namespace ckir::training
