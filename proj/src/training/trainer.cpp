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

#include "ckir/training/trainer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "ckir/common/error.hpp"

namespace ckir::training {

using ndrm::ModelParams;
using num::Tensor;
using num::Var;

void
TrainConfig::Validate() const {
    if (batch_size == 0 || negatives == 0 || threads == 0) {
        Throw(ErrorCode::InvalidArgument, "batch size, negatives and threads must be at least 1");
    }
    if (!(adam.lr > 0.0)) {
        Throw(ErrorCode::InvalidArgument, "learning rate must be positive");
    }
}

TrainingData
MakeTrainingData(const corpus::Corpus& corpus,
                 const corpus::Vocabulary& vocab,
                 const std::vector<corpus::Query>& queries,
                 eval::Qrels qrels,
                 const corpus::Limits& limits) {
    TrainingData data;
    for (const auto& doc : corpus.docs()) {
        data.doc_ids.push_back(doc.doc_id);
        data.doc_tokens.push_back(corpus::Flatten(doc, vocab, limits));
    }
    for (const auto& q : queries) {
        data.queries[q.query_id] = corpus::EncodeQuery(q.text, vocab, limits);
    }
    data.qrels = std::move(qrels);
    return data;
}

std::vector<TrainInstance>
SamplePairs(const TrainingData& data, std::size_t negatives, std::mt19937_64& rng) {
    std::map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < data.doc_ids.size(); ++i) {
        index.emplace(data.doc_ids[i], i);
    }
    std::vector<TrainInstance> pairs;
    std::vector<std::uint8_t> positive(data.doc_ids.size());
    std::vector<std::size_t> pool;
    for (const auto& [qid, judged] : data.qrels) {
        if (data.queries.find(qid) == data.queries.end()) {
            continue;
        }
        std::fill(positive.begin(), positive.end(), 0);
        std::vector<std::size_t> pos;
        for (const auto& [doc, grade] : judged) {
            auto it = index.find(doc);
            if (grade > 0 && it != index.end()) {
                positive[it->second] = 1;
                if (corpus::DocLength(data.doc_tokens[it->second]) > 0) {
                    pos.push_back(it->second);
                }
            }
        }
        if (pos.empty()) {
            continue;
        }
        pool.clear();
        for (std::size_t i = 0; i < data.doc_ids.size(); ++i) {
            if (positive[i] == 0 && corpus::DocLength(data.doc_tokens[i]) > 0) {
                pool.push_back(i);
            }
        }
        if (pool.empty()) {
            Throw(ErrorCode::NoPositives, "query " + qid + ": every document is positive, no negative to pair with");
        }
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        for (std::size_t p : pos) {
            for (std::size_t n = 0; n < negatives; ++n) {
                pairs.push_back(TrainInstance{qid, p, pool[pick(rng)]});
            }
        }
    }
    if (pairs.empty()) {
        Throw(ErrorCode::NoPositives, "no judged query has a positive document in the collection");
    }
    std::shuffle(pairs.begin(), pairs.end(), rng);
    return pairs;
}

double
PairwiseLoss(double s_pos, double s_neg) {
    const double x = s_neg - s_pos;
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename T>
Var<T>
PairwiseLoss(Var<T> s_pos, Var<T> s_neg) {
    return num::Softplus(num::Sub(s_neg, s_pos));
}

namespace {

template <typename T>
struct PairOutcome {
    double loss = 0.0;
    ModelParams<T> grads;
};

template <typename T>
PairOutcome<T>
RunPair(const TrainingData& data,
        const corpus::Vocabulary& vocab,
        const ndrm::ModelConfig& model_config,
        const ModelParams<T>& params,
        const TrainInstance& pair) {
    num::Tape<T> tape;
    const auto vars = ndrm::Bind(tape, params, true);
    const std::vector<TermId>& query = data.queries.at(pair.query_id);
    const auto pos = ndrm::PrepareDocument(vars, model_config, std::span<const TermId>(data.doc_tokens[pair.positive]));
    const auto neg = ndrm::PrepareDocument(vars, model_config, std::span<const TermId>(data.doc_tokens[pair.negative]));
    Var<T> s_pos = ndrm::QueryScore(vars, model_config, vocab, pos, std::span<const TermId>(query));
    Var<T> s_neg = ndrm::QueryScore(vars, model_config, vocab, neg, std::span<const TermId>(query));
    Var<T> loss = PairwiseLoss(s_pos, s_neg);
    tape.Backward(loss);
    return PairOutcome<T>{static_cast<double>(loss.value()[0]), ndrm::CollectGrads(tape, vars)};
}

template <typename T>
void
Accumulate(ModelParams<T>& sum, const ModelParams<T>& g) {
    ndrm::ZipSlots(sum, g, [](Tensor<T>& a, const Tensor<T>& b) {
        auto av = a.values();
        auto bv = b.values();
        for (std::size_t i = 0; i < av.size(); ++i) {
            av[i] += bv[i];
        }
    });
}

}  // namespace

template <typename T>
TrainResult<T>
Train(const TrainingData& data,
      const corpus::Vocabulary& vocab,
      const ndrm::ModelConfig& model_config,
      const TrainConfig& config,
      ModelParams<T> initial,
      const EpochCallback& on_epoch) {
    config.Validate();
    model_config.Validate();
    TrainResult<T> result;
    result.params = std::move(initial);
    ModelParams<T>& params = result.params;

    std::vector<Tensor<T>*> slots;
    ndrm::ForEachSlot(params, [&](const std::string&, Tensor<T>& t) { slots.push_back(&t); });
    num::AdamState<T> adam;
    adam.config = config.adam;
    std::mt19937_64 rng(config.seed);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const std::vector<TrainInstance> pairs = SamplePairs(data, config.negatives, rng);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < pairs.size(); begin += config.batch_size) {
            const std::size_t end = std::min(pairs.size(), begin + config.batch_size);
            const std::size_t step = result.steps + 1;
            try {
                std::vector<PairOutcome<T>> outcomes(end - begin);
                const std::size_t workers = std::min(config.threads, outcomes.size());
                auto work = [&](std::size_t w) {
                    for (std::size_t i = w; i < outcomes.size(); i += workers) {
                        outcomes[i] = RunPair(data, vocab, model_config, params, pairs[begin + i]);
                    }
                };
                if (workers <= 1) {
                    work(0);
                } else {
                    std::vector<std::exception_ptr> errors(workers);
                    std::vector<std::thread> threads;
                    for (std::size_t w = 0; w < workers; ++w) {
                        threads.emplace_back([&, w] {
                            try {
                                work(w);
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

                // reduce in pair order so the result does not depend on scheduling
                ModelParams<T> grad = std::move(outcomes[0].grads);
                epoch_loss += outcomes[0].loss;
                for (std::size_t i = 1; i < outcomes.size(); ++i) {
                    Accumulate(grad, outcomes[i].grads);
                    epoch_loss += outcomes[i].loss;
                }
                const T scale = T{1} / static_cast<T>(outcomes.size());
                std::vector<Tensor<T>> flat;
                ndrm::ForEachSlot(grad, [&](const std::string&, Tensor<T>& g) {
                    for (auto& v : g.values()) {
                        v *= scale;
                    }
                    flat.push_back(std::move(g));
                });
                for (auto& v : flat[0].row(corpus::kPad)) {
                    v = T{0};
                }
                for (const auto& g : flat) {
                    if (!g.AllFinite()) {
                        Throw(ErrorCode::NonFinite, "gradient is not finite");
                    }
                }
                num::AdamStep<T>(slots, flat, adam);
                for (auto& v : params.embedding.row(corpus::kPad)) {
                    v = T{0};
                }
            } catch (const Error& e) {
                if (e.code() == ErrorCode::NonFinite) {
                    Throw(ErrorCode::NonFinite, fmt::format("training step {}: {}", step, e.what()));
                }
                throw;
            }
            result.steps = step;
        }
        const double mean = epoch_loss / static_cast<double>(pairs.size());
        result.epoch_loss.push_back(mean);
        if (on_epoch) {
            on_epoch(epoch, mean);
        }
    }
    return result;
}

std::string
FormatLossHistory(const std::vector<double>& epoch_loss) {
    std::string out = "epoch,mean_loss\n";
    for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
        out += fmt::format("{},{:.9g}\n", i + 1, epoch_loss[i]);
    }
    return out;
}

#define CKIR_INSTANTIATE_TRAIN(T)                                                                            \
    template Var<T> PairwiseLoss<T>(Var<T>, Var<T>);                                                        \
    template TrainResult<T> Train<T>(const TrainingData&, const corpus::Vocabulary&, const ndrm::ModelConfig&, \
                                     const TrainConfig&, ModelParams<T>, const EpochCallback&);

CKIR_INSTANTIATE_TRAIN(float)
CKIR_INSTANTIATE_TRAIN(double)

}  // namespace ckir::training
