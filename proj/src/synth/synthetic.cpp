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

#include "ckir/synth/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "ckir/common/error.hpp"
#include "ckir/common/io.hpp"

namespace ckir::synth {

namespace {

std::string
Canonical(std::size_t topic, std::size_t idea) {
    return fmt::format("c{}x{}", topic, idea);
}

std::string
Synonym(std::size_t topic, std::size_t idea) {
    return fmt::format("s{}x{}", topic, idea);
}

std::string
JoinWords(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (!out.empty()) {
            out += ' ';
        }
        out += words[i];
    }
    return out;
}

struct DocPlan {
    std::size_t topic = 0;
    std::set<std::size_t> concepts;
};

bool
Flip(std::mt19937_64& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::size_t
Uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

void
SynthConfig::Validate() const {
    if (num_docs == 0 || num_topics == 0 || filler_terms == 0 || min_doc_len == 0 || rerank_depth == 0) {
        Throw(ErrorCode::InvalidArgument, "synthetic corpus sizes must be at least 1");
    }
    if (concepts_per_topic < 2) {
        Throw(ErrorCode::InvalidArgument, "need at least two concepts per topic");
    }
    if (max_doc_len < min_doc_len) {
        Throw(ErrorCode::InvalidArgument, "max_doc_len is below min_doc_len");
    }
    for (double r : {synonym_doc_rate, synonym_mention_rate, click_rate, test_fraction}) {
        if (!(r >= 0.0 && r <= 1.0)) {
            Throw(ErrorCode::InvalidArgument, "synthetic corpus rates must lie in [0, 1]");
        }
    }
}

SynthCorpus
Generate(const SynthConfig& config) {
    config.Validate();
    std::mt19937_64 rng(config.seed);
    SynthCorpus out;
    std::vector<DocPlan> plans(config.num_docs);

    for (std::size_t i = 0; i < config.num_docs; ++i) {
        DocPlan& plan = plans[i];
        plan.topic = Uniform(rng, 0, config.num_topics - 1);
        const bool synonym_doc = Flip(rng, config.synonym_doc_rate);
        std::vector<std::size_t> order(config.concepts_per_topic);
        for (std::size_t j = 0; j < order.size(); ++j) {
            order[j] = j;
        }
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t present = Uniform(rng, 1, config.concepts_per_topic);

        std::vector<std::string> words;
        for (std::size_t c = 0; c < present; ++c) {
            const std::size_t idea = order[c];
            plan.concepts.insert(idea);
            for (std::size_t m = Uniform(rng, 1, 3); m > 0; --m) {
                const bool swap = synonym_doc || Flip(rng, config.synonym_mention_rate);
                words.push_back(swap ? Synonym(plan.topic, idea) : Canonical(plan.topic, idea));
            }
        }
        // a stray mention of another topic's idea
        if (config.num_topics > 1 && Flip(rng, 0.3)) {
            std::size_t other = Uniform(rng, 0, config.num_topics - 2);
            other += other >= plan.topic ? 1 : 0;
            words.push_back(Canonical(other, Uniform(rng, 0, config.concepts_per_topic - 1)));
        }
        const std::size_t length = Uniform(rng, config.min_doc_len, config.max_doc_len);
        while (words.size() < length) {
            words.push_back(fmt::format("w{}", Uniform(rng, 0, config.filler_terms - 1)));
        }
        std::shuffle(words.begin(), words.end(), rng);
        const std::size_t title_len = std::min<std::size_t>(3, words.size());

        corpus::Document doc;
        doc.doc_id = fmt::format("D{:05d}", i);
        doc.title = JoinWords(words, 0, title_len);
        doc.body = JoinWords(words, title_len, words.size());
        out.docs.push_back(std::move(doc));

        if (Flip(rng, config.click_rate)) {
            const std::vector<std::size_t> mentioned(plan.concepts.begin(), plan.concepts.end());
            for (std::size_t k = Uniform(rng, 1, 2); k > 0; --k) {
                std::vector<std::size_t> pick = mentioned;
                std::shuffle(pick.begin(), pick.end(), rng);
                pick.resize(Uniform(rng, 1, std::min<std::size_t>(2, pick.size())));
                std::sort(pick.begin(), pick.end());
                std::vector<std::string> terms;
                for (std::size_t c : pick) {
                    terms.push_back(Canonical(plan.topic, c));
                }
                out.clicks.push_back(ClickRecord{fmt::format("C{:05d}", out.clicks.size()),
                                                 JoinWords(terms, 0, terms.size()), out.docs.back().doc_id});
            }
        }
    }

    std::size_t query_counter = 0;
    for (std::size_t topic = 0; topic < config.num_topics; ++topic) {
        std::vector<corpus::Query> topic_queries;
        const std::size_t c = config.concepts_per_topic;
        for (std::size_t size : {std::size_t{2}, std::size_t{3}}) {
            if (size > c) {
                continue;
            }
            // every idea subset of this size, in lexicographic order
            std::vector<std::uint8_t> select(c, 0);
            std::fill(select.begin(), select.begin() + static_cast<std::ptrdiff_t>(size), 1);
            do {
                std::vector<std::size_t> concepts;
                std::vector<std::string> terms;
                for (std::size_t j = 0; j < c; ++j) {
                    if (select[j] != 0) {
                        concepts.push_back(j);
                        terms.push_back(Canonical(topic, j));
                    }
                }
                std::map<std::string, int> judged;
                bool any_relevant = false;
                for (std::size_t d = 0; d < plans.size(); ++d) {
                    if (plans[d].topic != topic) {
                        continue;
                    }
                    int grade = 0;
                    for (std::size_t j : concepts) {
                        grade += plans[d].concepts.count(j) != 0 ? 1 : 0;
                    }
                    grade = std::min(grade, 3);
                    any_relevant = any_relevant || grade > 0;
                    judged[out.docs[d].doc_id] = grade;
                }
                if (any_relevant) {
                    corpus::Query q{fmt::format("Q{:04d}", query_counter++), JoinWords(terms, 0, terms.size())};
                    out.qrels[q.query_id] = std::move(judged);
                    topic_queries.push_back(std::move(q));
                }
            } while (std::prev_permutation(select.begin(), select.end()));
        }
        std::shuffle(topic_queries.begin(), topic_queries.end(), rng);
        const auto held_out = static_cast<std::size_t>(
            std::lround(config.test_fraction * static_cast<double>(topic_queries.size())));
        for (std::size_t i = 0; i < topic_queries.size(); ++i) {
            (i < held_out ? out.test_queries : out.train_queries).push_back(std::move(topic_queries[i]));
        }
    }
    auto by_id = [](const corpus::Query& a, const corpus::Query& b) { return a.query_id < b.query_id; };
    std::sort(out.train_queries.begin(), out.train_queries.end(), by_id);
    std::sort(out.test_queries.begin(), out.test_queries.end(), by_id);

    for (const auto& q : out.test_queries) {
        const auto& judged = out.qrels.at(q.query_id);
        std::vector<std::string> list;
        std::vector<std::string> others;
        for (const auto& doc : out.docs) {
            (judged.count(doc.doc_id) != 0 ? list : others).push_back(doc.doc_id);
        }
        std::shuffle(others.begin(), others.end(), rng);
        for (std::size_t i = 0; list.size() < config.rerank_depth && i < others.size(); ++i) {
            list.push_back(others[i]);
        }
        if (list.size() > config.rerank_depth) {
            list.resize(config.rerank_depth);
        }
        std::shuffle(list.begin(), list.end(), rng);
        out.candidates[q.query_id] = std::move(list);
    }
    return out;
}

corpus::Corpus
WithoutClicks(const SynthCorpus& synth) {
    return corpus::Corpus(synth.docs);
}

corpus::Corpus
WithClicks(const SynthCorpus& synth) {
    std::vector<corpus::Document> docs = synth.docs;
    std::map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        index.emplace(docs[i].doc_id, i);
    }
    for (const auto& click : synth.clicks) {
        docs[index.at(click.doc_id)].click_queries.push_back(click.text);
    }
    return corpus::Corpus(std::move(docs));
}

eval::Qrels
QrelsFor(const eval::Qrels& qrels, const std::vector<corpus::Query>& queries) {
    eval::Qrels out;
    for (const auto& q : queries) {
        if (auto it = qrels.find(q.query_id); it != qrels.end()) {
            out.insert(*it);
        }
    }
    return out;
}

void
WriteSynthCorpus(const SynthCorpus& synth, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        Throw(ErrorCode::IoError, dir + ": cannot create directory: " + ec.message());
    }
    const std::filesystem::path root(dir);
    corpus::WriteDocuments((root / "docs.tsv").string(), WithoutClicks(synth));
    std::string clicks;
    for (const auto& c : synth.clicks) {
        clicks += c.query_id + "\t" + c.text + "\t" + c.doc_id + "\n";
    }
    WriteFileAtomic((root / "clicks.tsv").string(), clicks);
    corpus::WriteQueries((root / "train_queries.tsv").string(), synth.train_queries);
    corpus::WriteQueries((root / "test_queries.tsv").string(), synth.test_queries);
    WriteFileAtomic((root / "train_qrels.txt").string(),
                    eval::FormatQrels(QrelsFor(synth.qrels, synth.train_queries)));
    WriteFileAtomic((root / "test_qrels.txt").string(), eval::FormatQrels(QrelsFor(synth.qrels, synth.test_queries)));
    std::string candidates;
    for (const auto& [qid, docs] : synth.candidates) {
        for (const auto& d : docs) {
            candidates += qid + "\t" + d + "\n";
        }
    }
    WriteFileAtomic((root / "candidates.tsv").string(), candidates);
}

}  // namespace ckir::synth
