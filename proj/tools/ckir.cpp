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


// ckir: synth, train, index, search (fullrank), rerank and eval.
//
// Exit status: 0 on success, 1 when the computation itself fails (empty
// corpus, no positives, non-finite values), 2 on usage, I/O and format
// errors. Every command reads and checks all of its inputs before it writes
// anything, and outputs are replaced atomically.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "ckir/common/error.hpp"
#include "ckir/common/io.hpp"
#include "ckir/corpus/vocabulary.hpp"
#include "ckir/eval/metrics.hpp"
#include "ckir/index/impact_index.hpp"
#include "ckir/ndrm/checkpoint.hpp"
#include "ckir/synth/synthetic.hpp"
#include "ckir/training/trainer.hpp"

namespace {

using namespace ckir;

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Output files go to existing directories only; checked before any work.
void
CheckOutput(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        Throw(ErrorCode::IoError, path + ": directory " + parent.string() + " does not exist");
    }
}

std::string
VocabPath(const std::string& explicit_path, const std::string& checkpoint) {
    return explicit_path.empty() ? checkpoint + ".vocab" : explicit_path;
}

corpus::Corpus
LoadCollection(const std::string& docs, const std::string& clicks) {
    corpus::Corpus c = corpus::ReadDocuments(docs);
    if (!clicks.empty()) {
        const std::size_t attached = corpus::AttachClicks(clicks, c);
        fmt::print(stderr, "attached {} click queries\n", attached);
    }
    if (c.empty()) {
        Throw(ErrorCode::EmptyCorpus, docs + ": no documents");
    }
    return c;
}

struct Flat {
    std::vector<std::string> ids;
    std::vector<std::vector<corpus::TermId>> tokens;
};

Flat
FlattenAll(const corpus::Corpus& c, const corpus::Vocabulary& vocab, const corpus::Limits& limits) {
    Flat out;
    for (const auto& d : c.docs()) {
        out.ids.push_back(d.doc_id);
        out.tokens.push_back(corpus::Flatten(d, vocab, limits));
    }
    return out;
}

// Replaces `--config FILE` by one `--key=value` argument per line of FILE,
// placed right after the subcommand so that explicit flags come later and win.
// Blank lines and lines starting with '#' are skipped.
std::vector<std::string>
ExpandConfig(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::vector<std::string> from_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
            continue;
        }
        LineReader reader(path);
        std::string line;
        while (reader.Next(line)) {
            const auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == '#') {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                ThrowFormat(path, reader.line_no(), "expected key=value");
            }
            auto trim = [](std::string v) {
                v.erase(0, v.find_first_not_of(" \t"));
                v.erase(v.find_last_not_of(" \t") + 1);
                return v;
            };
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) {
                ThrowFormat(path, reader.line_no(), "empty key");
            }
            from_file.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
        }
    }
    if (!from_file.empty() && !out.empty()) {
        out.insert(out.begin() + 1, from_file.begin(), from_file.end());
    }
    return out;
}

// ---- synth

struct SynthArgs {
    std::string out;
    synth::SynthConfig config;
};

void
RunSynth(const SynthArgs& a) {
    a.config.Validate();
    const auto s = synth::Generate(a.config);
    synth::WriteSynthCorpus(s, a.out);
    fmt::print(stderr, "{} documents, {} train and {} test queries, {} clicks -> {}\n", s.docs.size(),
               s.train_queries.size(), s.test_queries.size(), s.clicks.size(), a.out);
}

// ---- train

struct TrainArgs {
    std::string docs, clicks, queries, qrels, checkpoint, vocab, loss;
    std::string variant = "ndrm3";
    std::size_t dim = 64, key_dim = 0, value_dim = 0, layers = 2, window = 7, ffn = 128;
    std::size_t max_doc_len = 1024, max_query_len = 20, min_df = 2;
    training::TrainConfig train;
    bool f64 = false;
};

void
RunTrain(const TrainArgs& a) {
    ndrm::ModelConfig mc;
    mc.variant = ndrm::ParseVariant(a.variant);
    mc.embed_dim = a.dim;
    mc.key_dim = a.key_dim == 0 ? a.dim : a.key_dim;
    mc.value_dim = a.value_dim == 0 ? a.dim : a.value_dim;
    mc.num_layers = a.layers;
    mc.conv_window = a.window;
    mc.ffn_dim = a.ffn;
    mc.max_doc_len = a.max_doc_len;
    mc.max_query_len = a.max_query_len;
    mc.Validate();
    a.train.Validate();
    const std::string vocab_path = VocabPath(a.vocab, a.checkpoint);
    const std::string loss_path = a.loss.empty() ? a.checkpoint + ".loss.csv" : a.loss;
    for (const auto& p : {a.checkpoint, vocab_path, loss_path}) {
        CheckOutput(p);
    }

    const corpus::Corpus c = LoadCollection(a.docs, a.clicks);
    const auto queries = corpus::ReadQueries(a.queries);
    const auto qrels = eval::ReadQrels(a.qrels);
    const auto vocab = corpus::Vocabulary::Build(c.docs(), a.min_df, mc.limits());
    const auto data = training::MakeTrainingData(c, vocab, queries, qrels, mc.limits());
    fmt::print(stderr, "{} documents, {} terms, {} queries\n", c.size(), vocab.size(), data.queries.size());

    auto report = [](std::size_t epoch, double loss) { fmt::print(stderr, "epoch {}: loss {:.6f}\n", epoch, loss); };
    ndrm::ModelParams<float> params;
    std::vector<double> history;
    if (a.f64) {
        auto r = training::Train<double>(data, vocab, mc, a.train,
                                         ndrm::InitParams<double>(mc, vocab.table_size(), a.train.seed), report);
        params = ndrm::CastParams<float>(r.params);
        history = std::move(r.epoch_loss);
    } else {
        auto r = training::Train<float>(data, vocab, mc, a.train,
                                        ndrm::InitParams<float>(mc, vocab.table_size(), a.train.seed), report);
        params = std::move(r.params);
        history = std::move(r.epoch_loss);
    }
    ndrm::SaveCheckpoint(a.checkpoint, mc, params);
    vocab.Save(vocab_path);
    WriteFileAtomic(loss_path, training::FormatLossHistory(history));
}

// ---- index

struct IndexArgs {
    std::string docs, clicks, checkpoint, vocab, out;
    std::string mode = "own";
    float threshold = 0.0f;
    std::size_t threads = 1;
};

void
RunIndex(const IndexArgs& a) {
    index::IndexConfig ic{index::ParseExpansionMode(a.mode), a.threshold, a.threads};
    if (a.threads == 0) {
        throw UsageError("--threads must be at least 1");
    }
    CheckOutput(a.out);
    const auto ckpt = ndrm::LoadCheckpoint(a.checkpoint);
    const auto vocab = corpus::Vocabulary::Load(VocabPath(a.vocab, a.checkpoint));
    if (vocab.table_size() != ckpt.params.embedding.rows()) {
        throw UsageError(fmt::format("{}: vocabulary of {} ids does not match the checkpoint's {} embedding rows",
                                     VocabPath(a.vocab, a.checkpoint), vocab.table_size(),
                                     ckpt.params.embedding.rows()));
    }
    const corpus::Corpus c = LoadCollection(a.docs, a.clicks);
    const Flat flat = FlattenAll(c, vocab, ckpt.config.limits());
    const auto idx = index::BuildIndex(flat.ids, flat.tokens, ckpt.params, ckpt.config, vocab, ic,
                                       ndrm::CheckpointDigest(ckpt.config, ckpt.params));
    idx.Save(a.out);
    std::size_t postings = 0;
    for (const auto& [term, list] : idx.postings()) {
        postings += list.refs.size();
    }
    fmt::print(stderr, "{} documents, {} terms, {} postings -> {}\n", flat.ids.size(), idx.postings().size(),
               postings, a.out);
}

// ---- search

struct SearchArgs {
    std::string index, vocab, checkpoint, queries, run;
    std::string tag = "ckir";
    std::size_t k = 100, max_query_len = 20;
};

void
RunSearch(const SearchArgs& a) {
    CheckOutput(a.run);
    if (a.vocab.empty() && a.checkpoint.empty()) {
        throw UsageError("search needs --vocab or --checkpoint");
    }
    const auto idx = index::ImpactIndex::Load(a.index);
    corpus::Limits limits{1, a.max_query_len};
    if (!a.checkpoint.empty()) {
        const auto ckpt = ndrm::LoadCheckpoint(a.checkpoint);
        if (ndrm::CheckpointDigest(ckpt.config, ckpt.params) != idx.meta().model_digest) {
            throw UsageError(fmt::format("{} was not built from {}", a.index, a.checkpoint));
        }
        limits = ckpt.config.limits();
    }
    const auto vocab = corpus::Vocabulary::Load(VocabPath(a.vocab, a.checkpoint));
    const auto queries = corpus::ReadQueries(a.queries);
    eval::Run run;
    run.tag = a.tag;
    for (const auto& q : queries) {
        const auto ids = corpus::EncodeQuery(q.text, vocab, limits);
        run.rankings[q.query_id] = idx.Retrieve(ids, a.k);
    }
    eval::WriteRun(a.run, run);
}

// ---- rerank

struct RerankArgs {
    std::string docs, clicks, checkpoint, vocab, queries, candidates, run;
    std::string tag = "ckir";
    std::size_t k = 100;
};

void
RunRerank(const RerankArgs& a) {
    CheckOutput(a.run);
    const auto ckpt = ndrm::LoadCheckpoint(a.checkpoint);
    const auto vocab = corpus::Vocabulary::Load(VocabPath(a.vocab, a.checkpoint));
    const corpus::Corpus c = LoadCollection(a.docs, a.clicks);
    const auto queries = corpus::ReadQueries(a.queries);
    const auto candidates = eval::ReadCandidates(a.candidates);
    const Flat flat = FlattenAll(c, vocab, ckpt.config.limits());
    eval::Run run;
    run.tag = a.tag;
    for (const auto& q : queries) {
        auto it = candidates.find(q.query_id);
        if (it == candidates.end()) {
            continue;
        }
        const auto ids = corpus::EncodeQuery(q.text, vocab, ckpt.config.limits());
        auto ranked = index::Rerank(ckpt.params, ckpt.config, vocab, flat.ids, flat.tokens, ids, it->second);
        if (ranked.size() > a.k) {
            ranked.resize(a.k);
        }
        run.rankings[q.query_id] = std::move(ranked);
    }
    eval::WriteRun(a.run, run);
}

// ---- eval

struct EvalArgs {
    std::string run, qrels, out;
    int threshold = 1;
    int max_grade = eval::kDefaultMaxGrade;
};

void
RunEval(const EvalArgs& a) {
    if (!a.out.empty()) {
        CheckOutput(a.out);
    }
    const auto qrels = eval::ReadQrels(a.qrels, a.max_grade);
    const auto run = eval::ReadRun(a.run);
    const std::string report = eval::FormatReport(eval::EvaluateRun(run, qrels, a.threshold));
    if (a.out.empty()) {
        fmt::print("{}", report);
    } else {
        WriteFileAtomic(a.out, report);
    }
}

}  // namespace

int
main(int argc, char** argv) {
    CLI::App app{"ckir: neural ranking with query term independence and impact indexes"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "write a synthetic collection with planted relevance");
    {
        auto& c = synth_args.config;
        synth->add_option("--out", synth_args.out, "output directory")->required();
        synth->add_option("--docs", c.num_docs, "number of documents")->capture_default_str();
        synth->add_option("--topics", c.num_topics)->capture_default_str();
        synth->add_option("--concepts", c.concepts_per_topic, "concepts per topic")->capture_default_str();
        synth->add_option("--filler", c.filler_terms, "filler vocabulary size")->capture_default_str();
        synth->add_option("--min-len", c.min_doc_len)->capture_default_str();
        synth->add_option("--max-len", c.max_doc_len)->capture_default_str();
        synth->add_option("--synonym-docs", c.synonym_doc_rate)->capture_default_str();
        synth->add_option("--synonym-mentions", c.synonym_mention_rate)->capture_default_str();
        synth->add_option("--click-rate", c.click_rate)->capture_default_str();
        synth->add_option("--test-fraction", c.test_fraction)->capture_default_str();
        synth->add_option("--depth", c.rerank_depth, "rerank candidates per test query")->capture_default_str();
        synth->add_option("--seed", c.seed)->capture_default_str();
    }

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a ranking model");
    {
        auto& t = train_args;
        train->add_option("--docs", t.docs, "documents TSV")->required();
        train->add_option("--clicks", t.clicks, "click log TSV");
        train->add_option("--queries", t.queries, "training queries TSV")->required();
        train->add_option("--qrels", t.qrels, "training judgments")->required();
        train->add_option("--checkpoint", t.checkpoint, "output checkpoint")->required();
        train->add_option("--vocab", t.vocab, "output vocabulary (default <checkpoint>.vocab)");
        train->add_option("--loss", t.loss, "loss CSV (default <checkpoint>.loss.csv)");
        train->add_option("--variant", t.variant, "ndrm1, ndrm2 or ndrm3")->capture_default_str();
        train->add_option("--dim", t.dim, "embedding size")->capture_default_str();
        train->add_option("--key-dim", t.key_dim, "attention key size (default --dim)");
        train->add_option("--value-dim", t.value_dim, "attention value size (default --dim)");
        train->add_option("--layers", t.layers)->capture_default_str();
        train->add_option("--window", t.window, "convolution window (odd)")->capture_default_str();
        train->add_option("--ffn", t.ffn, "feed-forward width")->capture_default_str();
        train->add_option("--max-doc-len", t.max_doc_len)->capture_default_str();
        train->add_option("--max-query-len", t.max_query_len)->capture_default_str();
        train->add_option("--min-df", t.min_df)->capture_default_str();
        train->add_option("--epochs", t.train.epochs)->capture_default_str();
        train->add_option("--batch", t.train.batch_size)->capture_default_str();
        train->add_option("--negatives", t.train.negatives, "negatives per positive")->capture_default_str();
        train->add_option("--lr", t.train.adam.lr)->capture_default_str();
        train->add_option("--seed", t.train.seed)->capture_default_str();
        train->add_option("--threads", t.train.threads)->capture_default_str();
        train->add_flag("--f64", t.f64, "train in double precision");
    }

    IndexArgs index_args;
    auto* index = app.add_subcommand("index", "precompute term impacts into an inverted index");
    index->add_option("--docs", index_args.docs, "documents TSV")->required();
    index->add_option("--clicks", index_args.clicks, "click log TSV");
    index->add_option("--checkpoint", index_args.checkpoint)->required();
    index->add_option("--vocab", index_args.vocab, "vocabulary (default <checkpoint>.vocab)");
    index->add_option("--out", index_args.out, "output index")->required();
    index->add_option("--mode", index_args.mode, "own or full")->capture_default_str();
    index->add_option("--threshold", index_args.threshold, "keep impacts above this")->capture_default_str();
    index->add_option("--threads", index_args.threads)->capture_default_str();

    SearchArgs search_args;
    auto* search = app.add_subcommand("search", "retrieve the top k documents from an index");
    search->add_option("--index", search_args.index)->required();
    search->add_option("--vocab", search_args.vocab, "vocabulary (default <checkpoint>.vocab)");
    search->add_option("--checkpoint", search_args.checkpoint, "checked against the index");
    search->add_option("--queries", search_args.queries, "queries TSV")->required();
    search->add_option("--run", search_args.run, "output run file")->required();
    search->add_option("--k", search_args.k)->capture_default_str()->check(CLI::PositiveNumber);
    search->add_option("--max-query-len", search_args.max_query_len, "used without --checkpoint")
        ->capture_default_str();
    search->add_option("--tag", search_args.tag)->capture_default_str();

    RerankArgs rerank_args;
    auto* rerank = app.add_subcommand("rerank", "score provided candidates with the model");
    rerank->add_option("--docs", rerank_args.docs, "documents TSV")->required();
    rerank->add_option("--clicks", rerank_args.clicks, "click log TSV");
    rerank->add_option("--checkpoint", rerank_args.checkpoint)->required();
    rerank->add_option("--vocab", rerank_args.vocab, "vocabulary (default <checkpoint>.vocab)");
    rerank->add_option("--queries", rerank_args.queries, "queries TSV")->required();
    rerank->add_option("--candidates", rerank_args.candidates, "query_id<TAB>doc_id lines")->required();
    rerank->add_option("--run", rerank_args.run, "output run file")->required();
    rerank->add_option("--k", rerank_args.k)->capture_default_str()->check(CLI::PositiveNumber);
    rerank->add_option("--tag", rerank_args.tag)->capture_default_str();

    EvalArgs eval_args;
    auto* evaluate = app.add_subcommand("eval", "score a run against judgments");
    evaluate->add_option("--run", eval_args.run)->required();
    evaluate->add_option("--qrels", eval_args.qrels)->required();
    evaluate->add_option("--out", eval_args.out, "metrics CSV (default stdout)");
    evaluate->add_option("--threshold", eval_args.threshold, "lowest relevant grade for AP and RR")
        ->capture_default_str();
    evaluate->add_option("--max-grade", eval_args.max_grade)->capture_default_str();

    std::string config_help;
    for (auto* sub : {synth, train, index, search, rerank, evaluate}) {
        sub->add_option("--config", config_help, "key=value file using the long flag names; flags take precedence");
    }

    std::vector<std::string> args;
    try {
        args = ExpandConfig(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    }
    std::reverse(args.begin(), args.end());  // CLI11 takes the vector back to front

    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth) {
            RunSynth(synth_args);
        } else if (*train) {
            RunTrain(train_args);
        } else if (*index) {
            RunIndex(index_args);
        } else if (*search) {
            RunSearch(search_args);
        } else if (*rerank) {
            RunRerank(rerank_args);
        } else if (*evaluate) {
            RunEval(eval_args);
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        // bad flag values surface as InvalidArgument from the library
        return e.IsIoError() || e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitDomain;
    } catch (const UsageError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitDomain;
    }
    return 0;
}
