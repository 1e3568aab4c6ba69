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

#include "../test_util.hpp"
#include "ckir/common/io.hpp"
#include "ckir/ndrm/checkpoint.hpp"
#include "ckir/ndrm/model.hpp"
#include "ckir/numerics/grad_check.hpp"
#include "doctest.h"

using namespace ckir;
using namespace ckir::ndrm;
using ckir::corpus::Document;
using ckir::corpus::kPad;
using ckir::corpus::TermId;
using ckir::corpus::Vocabulary;
using ckir::testing::CaptureError;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

ModelConfig
TinyConfig(Variant variant = Variant::Ndrm3, std::size_t layers = 1) {
    ModelConfig c;
    c.embed_dim = 6;
    c.key_dim = 4;
    c.value_dim = 5;
    c.num_layers = layers;
    c.conv_window = 3;
    c.ffn_dim = 7;
    c.max_doc_len = 64;
    c.max_query_len = 8;
    c.variant = variant;
    return c;
}

Vocabulary
TinyVocab() {
    std::vector<Document> docs;
    docs.push_back(Document{"d1", "", "alpha beta", "gamma delta alpha", {}});
    docs.push_back(Document{"d2", "", "", "beta epsilon zeta eta", {}});
    docs.push_back(Document{"d3", "", "", "theta iota kappa lambda alpha", {}});
    return Vocabulary::Build(docs, 1, {});
}

template <typename T>
Tensor<T>
RandomTensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Tensor<T> t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<T>(u(rng));
    }
    return t;
}

double
MaxAbsDiff(const Tensor<double>& a, const Tensor<double>& b) {
    REQUIRE(a.shape() == b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

Tensor<double>
RowsOf(const Tensor<double>& t, std::size_t begin, std::size_t end) {
    Tensor<double> out(Shape{end - begin, t.cols()});
    for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) {
            out.at(r - begin, c) = t.at(r, c);
        }
    }
    return out;
}

void
ZeroBranchOutputs(ModelParams<double>& p) {
    for (auto& l : p.layers) {
        l.attn_out_proj.Fill(0.0);
        l.attn_out_bias.Fill(0.0);
        l.conv_mix.Fill(0.0);
        l.conv_mix_bias.Fill(0.0);
        l.ffn_out.Fill(0.0);
        l.ffn_out_bias.Fill(0.0);
    }
}

}  // namespace

TEST_CASE("separable attention") {
    const ModelConfig config = TinyConfig();
    std::mt19937_64 rng(3);
    const auto params = InitParams<double>(config, 10, 11);
    Tape<double> tape;
    const auto vars = Bind(tape, params, false);
    const auto& layer = vars.layers[0];

    SUBCASE("single position returns its value projection") {
        Var<double> x = tape.Constant(RandomTensor<double>(Shape{1, 6}, rng));
        Var<double> out = SeparableAttention(x, layer, num::Mask{1});
        Var<double> v = num::MatMul(x, layer.value_proj);
        CHECK(MaxAbsDiff(out.value(), v.value()) < 1e-12);
    }
    SUBCASE("zero input gives zero output") {
        Var<double> x = tape.Constant(Tensor<double>(Shape{5, 6}));
        Var<double> out = SeparableAttention(x, layer, num::Mask(5, 1));
        CHECK(MaxAbsDiff(out.value(), Tensor<double>(Shape{5, 5})) == 0.0);
    }
    SUBCASE("masked positions do not contribute") {
        Tensor<double> base = RandomTensor<double>(Shape{4, 6}, rng);
        Tensor<double> other = base;
        for (std::size_t c = 0; c < 6; ++c) {
            other.at(3, c) = 7.0;
        }
        const num::Mask mask{1, 1, 1, 0};
        Var<double> a = SeparableAttention(tape.Constant(base), layer, mask);
        Var<double> b = SeparableAttention(tape.Constant(other), layer, mask);
        CHECK(MaxAbsDiff(RowsOf(a.value(), 0, 3), RowsOf(b.value(), 0, 3)) < 1e-12);
    }
    SUBCASE("all masked") {
        Var<double> x = tape.Constant(Tensor<double>(Shape{2, 6}));
        CHECK(CaptureError([&] { SeparableAttention(x, layer, num::Mask(2, 0)); }) == ErrorCode::AllMasked);
    }
}

TEST_CASE("separable attention never forms an n by n buffer") {
    ModelConfig config = TinyConfig();
    config.key_dim = 16;
    config.value_dim = 24;
    const auto params = InitParams<float>(config, 10, 5);
    for (std::size_t n : {128u, 512u}) {
        std::mt19937_64 rng(n);
        Tape<float> tape;
        const auto vars = Bind(tape, params, false);
        const std::size_t before = tape.size();
        Var<float> x = tape.Constant(RandomTensor<float>(Shape{n, config.embed_dim}, rng));
        SeparableAttention(x, vars.layers[0], num::Mask(n, 1));
        bool context_seen = false;
        for (std::size_t i = before; i < tape.size(); ++i) {
            const Shape s = tape.info(i).shape;
            for (std::size_t a = 0; a < s.rank(); ++a) {
                for (std::size_t b = a + 1; b < s.rank(); ++b) {
                    CHECK_FALSE((s[a] == n && s[b] == n));
                }
            }
            context_seen = context_seen || (s == Shape{config.key_dim, config.value_dim});
        }
        CHECK(context_seen);
    }
}

TEST_CASE("conformer layer") {
    const ModelConfig config = TinyConfig();
    std::mt19937_64 rng(7);
    auto params = InitParams<double>(config, 10, 13);

    SUBCASE("zero branch weights give the identity") {
        ZeroBranchOutputs(params);
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        Tensor<double> x = RandomTensor<double>(Shape{6, 6}, rng);
        Var<double> out = ConformerLayer(tape.Constant(x), vars.layers[0], num::Mask(6, 1));
        CHECK(MaxAbsDiff(out.value(), x) < 1e-12);
    }
    SUBCASE("attention reaches every position, convolution stays local") {
        const std::size_t n = 9, j = 4, radius = (config.conv_window - 1) / 2;
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        Tensor<double> x = RandomTensor<double>(Shape{n, 6}, rng);
        Tensor<double> y = x;
        for (std::size_t c = 0; c < 6; ++c) {
            y.at(j, c) += 0.5 * static_cast<double>(c + 1);
        }
        const num::Mask mask(n, 1);
        const auto& layer = vars.layers[0];
        const Tensor<double> att_x = AttentionBranch(tape.Constant(x), layer, mask).value();
        const Tensor<double> att_y = AttentionBranch(tape.Constant(y), layer, mask).value();
        const Tensor<double> conv_x = ConvBranch(tape.Constant(x), layer, mask, false).value();
        const Tensor<double> conv_y = ConvBranch(tape.Constant(y), layer, mask, false).value();
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(MaxAbsDiff(RowsOf(att_x, i, i + 1), RowsOf(att_y, i, i + 1)) > 1e-9);
            const double conv_change = MaxAbsDiff(RowsOf(conv_x, i, i + 1), RowsOf(conv_y, i, i + 1));
            const std::size_t dist = i > j ? i - j : j - i;
            if (dist <= radius) {
                CHECK(conv_change > 1e-9);
            } else {
                CHECK(conv_change == 0.0);
            }
        }
    }
    SUBCASE("shape is preserved") {
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        for (std::size_t n : {1u, 2u, 17u, 64u}) {
            Var<double> out = ConformerLayer(tape.Constant(RandomTensor<double>(Shape{n, 6}, rng)), vars.layers[0],
                                             num::Mask(n, 1));
            CHECK(out.shape() == Shape{n, 6});
        }
    }
}

TEST_CASE("encode document") {
    const ModelConfig config = TinyConfig(Variant::Ndrm1, 2);
    const auto params = InitParams<double>(config, 12, 17);
    const std::vector<TermId> tokens{2, 5, kPad, 7, 3, 3, 11};

    SUBCASE("all padding") {
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        const std::vector<TermId> pads{kPad, kPad};
        CHECK(CaptureError([&] { EncodeDocument(vars, std::span<const TermId>(pads)); }) ==
              ErrorCode::EmptyDocument);
    }
    SUBCASE("unit rows on valid positions, zero rows on padding") {
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        const auto enc = EncodeDocument(vars, std::span<const TermId>(tokens));
        const auto& rows = enc.rows.value();
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            double norm = 0.0;
            for (std::size_t c = 0; c < rows.cols(); ++c) {
                norm += rows.at(i, c) * rows.at(i, c);
            }
            CHECK(std::sqrt(norm) == doctest::Approx(tokens[i] == kPad ? 0.0 : 1.0).epsilon(1e-5));
            CHECK(enc.mask[i] == (tokens[i] == kPad ? 0 : 1));
        }
    }
    SUBCASE("no layers gives normalised embeddings") {
        const ModelConfig flat = TinyConfig(Variant::Ndrm1, 0);
        const auto p0 = InitParams<double>(flat, 12, 17);
        Tape<double> tape;
        const auto vars = Bind(tape, p0, false);
        const auto enc = EncodeDocument(vars, std::span<const TermId>(tokens));
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            double norm = 0.0;
            for (std::size_t c = 0; c < 6; ++c) {
                norm += p0.embedding.at(tokens[i], c) * p0.embedding.at(tokens[i], c);
            }
            norm = std::sqrt(norm);
            for (std::size_t c = 0; c < 6; ++c) {
                const double expected = tokens[i] == kPad ? 0.0 : p0.embedding.at(tokens[i], c) / norm;
                CHECK(enc.rows.value().at(i, c) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
    SUBCASE("trailing padding leaves valid rows unchanged") {
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        std::vector<TermId> padded = tokens;
        padded.resize(tokens.size() + 9, kPad);
        const auto a = EncodeDocument(vars, std::span<const TermId>(tokens));
        const auto b = EncodeDocument(vars, std::span<const TermId>(padded));
        CHECK(MaxAbsDiff(a.rows.value(), RowsOf(b.rows.value(), 0, tokens.size())) < 1e-5);
    }
    SUBCASE("token order matters") {
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        const std::vector<TermId> ab{2, 5, 7, 9};
        const std::vector<TermId> ba{5, 2, 7, 9};
        const auto a = EncodeDocument(vars, std::span<const TermId>(ab));
        const auto b = EncodeDocument(vars, std::span<const TermId>(ba));
        // row of token 2 in each ordering
        CHECK(MaxAbsDiff(RowsOf(a.rows.value(), 0, 1), RowsOf(b.rows.value(), 1, 2)) > 1e-9);
    }
}

TEST_CASE("kernel features") {
    ModelConfig config = TinyConfig();
    config.kernel_mus = {1.0f, 0.5f};
    config.kernel_sigmas = {0.1f, 0.1f};
    Tape<double> tape;
    Tensor<double> e0(Shape{1, 2}, {1.0, 0.0});
    Tensor<double> e1(Shape{1, 2}, {0.0, 1.0});
    const DocEncoding<double> doc{tape.Constant(e0), num::Mask{1}};

    const Tensor<double> same = KernelFeatures(tape.Constant(e0), doc, config).value();
    CHECK(same[0] == doctest::Approx(std::log(1.0 + 1e-6)).epsilon(1e-12));
    CHECK(same[0] == doctest::Approx(1e-6).epsilon(1e-5));

    const Tensor<double> orth = KernelFeatures(tape.Constant(e1), doc, config).value();
    CHECK(orth[0] == doctest::Approx(std::log(1e-6 + std::exp(-50.0))).epsilon(1e-12));
    CHECK(orth[0] == doctest::Approx(-13.8155).epsilon(1e-5));

    SUBCASE("duplicating every position doubles the kernel sum") {
        Tensor<double> rows(Shape{3, 2}, {0.6, 0.8, 1.0, 0.0, 0.0, 1.0});
        Tensor<double> twice(Shape{6, 2}, {0.6, 0.8, 1.0, 0.0, 0.0, 1.0, 0.6, 0.8, 1.0, 0.0, 0.0, 1.0});
        Tensor<double> q(Shape{1, 2}, {0.8, 0.6});
        const auto a = KernelFeatures(tape.Constant(q), DocEncoding<double>{tape.Constant(rows), num::Mask(3, 1)},
                                      config)
                           .value();
        const auto b = KernelFeatures(tape.Constant(q), DocEncoding<double>{tape.Constant(twice), num::Mask(6, 1)},
                                      config)
                           .value();
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(std::exp(b[k]) - 1e-6 == doctest::Approx(2.0 * (std::exp(a[k]) - 1e-6)).epsilon(1e-9));
        }
    }
}

TEST_CASE("ndrm1 term scores") {
    const ModelConfig config = TinyConfig(Variant::Ndrm1, 0);
    auto params = InitParams<double>(config, 12, 23);
    const std::vector<TermId> doc_tokens{2, 4, kPad, 6, 8};
    const std::vector<TermId> terms{2, 3, 9};

    SUBCASE("oracle") {
        std::mt19937_64 rng(19);
        params.kernel_weight = RandomTensor<double>(params.kernel_weight.shape(), rng, 0.1);
        params.kernel_bias[0] = 0.5;
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        const auto enc = EncodeDocument(vars, std::span<const TermId>(doc_tokens));
        const auto got = Ndrm1TermScores(vars, enc, std::span<const TermId>(terms), config).value();

        // straight-line evaluation with no encoder layers
        auto unit = [&](TermId id) {
            std::vector<double> v(6);
            double n = 0.0;
            for (std::size_t c = 0; c < 6; ++c) {
                v[c] = params.embedding.at(id, c);
                n += v[c] * v[c];
            }
            for (auto& x : v) {
                x /= std::sqrt(n);
            }
            return v;
        };
        bool any_positive = false;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto q = unit(terms[t]);
            double pre = params.kernel_bias[0];
            for (std::size_t k = 0; k < config.kernel_mus.size(); ++k) {
                const double mu = config.kernel_mus[k], sigma = config.kernel_sigmas[k];
                double sum = 0.0;
                for (TermId id : doc_tokens) {
                    if (id == kPad) {
                        continue;
                    }
                    const auto d = unit(id);
                    double s = 0.0;
                    for (std::size_t c = 0; c < 6; ++c) {
                        s += q[c] * d[c];
                    }
                    sum += std::exp(-(s - mu) * (s - mu) / (2.0 * sigma * sigma));
                }
                pre += params.kernel_weight[k] * std::log(1e-6 + sum);
            }
            const double expected = std::max(0.0, pre);
            any_positive = any_positive || expected > 0.0;
            CHECK(got[t] == doctest::Approx(expected).epsilon(1e-10));
        }
        CHECK(any_positive);
    }
    SUBCASE("zero head gives zero") {
        params.kernel_weight.Fill(0.0);
        params.kernel_bias.Fill(0.0);
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        const auto enc = EncodeDocument(vars, std::span<const TermId>(doc_tokens));
        const auto got = Ndrm1TermScores(vars, enc, std::span<const TermId>(terms), config).value();
        for (std::size_t t = 0; t < terms.size(); ++t) {
            CHECK(got[t] == 0.0);
        }
    }
    SUBCASE("large negative bias hits the floor") {
        params.kernel_bias[0] = -1e6;
        Tape<double> tape;
        const auto vars = Bind(tape, params, false);
        const auto enc = EncodeDocument(vars, std::span<const TermId>(doc_tokens));
        const auto got = Ndrm1TermScores(vars, enc, std::span<const TermId>(terms), config).value();
        for (std::size_t t = 0; t < terms.size(); ++t) {
            CHECK(got[t] == 0.0);
        }
    }
}

TEST_CASE("ndrm2 term scores") {
    const ModelConfig config = TinyConfig(Variant::Ndrm2);
    auto params = InitParams<double>(config, 12, 29);
    params.exact_weight_raw[0] = std::log(std::expm1(1.0));
    params.k1_raw[0] = std::log(std::expm1(1.2));
    params.b_raw[0] = std::log(3.0);  // sigmoid = 0.75
    Tape<double> tape;
    const auto vars = Bind(tape, params, false);

    ExactMatchInputs in;
    in.tf = {2.0, 0.0, 1e12};
    in.idf = {1.0, 1.0, 1.7};
    in.doc_len = 40.0;
    in.avgdl = 40.0;
    const auto got = Ndrm2TermScores(vars, in).value();
    CHECK(got[0] == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(got[1] == 0.0);
    CHECK(got[2] == doctest::Approx(1.7).epsilon(1e-9));
    CHECK(got[2] <= 1.7);

    SUBCASE("default initialisation starts at the usual constants") {
        const auto init = InitParams<double>(config, 12, 1);
        CHECK(std::log1p(std::exp(init.k1_raw[0])) == doctest::Approx(1.2).epsilon(1e-9));
        CHECK(1.0 / (1.0 + std::exp(-init.b_raw[0])) == doctest::Approx(0.75).epsilon(1e-9));
    }
}

TEST_CASE("ndrm3 gate") {
    const ModelConfig config = TinyConfig();
    auto params = InitParams<double>(config, 12, 31);
    Tape<double> tape;
    Var<double> s1 = tape.Constant(Tensor<double>(Shape{2, 1}, {0.8, 0.0}));
    Var<double> s2 = tape.Constant(Tensor<double>(Shape{2, 1}, {0.2, 0.0}));

    params.gate_raw[0] = 50.0;
    auto high = CombineScores(Bind(tape, params, false), s1, s2).value();
    CHECK(high[0] == 0.8);
    CHECK(high[1] == 0.0);

    params.gate_raw[0] = 0.0;
    auto mid = CombineScores(Bind(tape, params, false), s1, s2).value();
    CHECK(mid[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mid[1] == 0.0);
}

TEST_CASE("query scores decompose over terms") {
    const Vocabulary vocab = TinyVocab();
    const Document d1{"d1", "", "alpha beta", "gamma delta alpha", {}};
    const auto tokens = corpus::Flatten(d1, vocab, {64, 8});
    const TermId alpha = vocab.Id("alpha"), beta = vocab.Id("beta"), zeta = vocab.Id("zeta");
    for (Variant v : {Variant::Ndrm1, Variant::Ndrm2, Variant::Ndrm3}) {
        CAPTURE(VariantName(v));
        const ModelConfig config = TinyConfig(v, 1);
        auto params = InitParams<float>(config, vocab.table_size(), 37);
        std::mt19937_64 rng(37);
        params.kernel_weight = RandomTensor<float>(params.kernel_weight.shape(), rng, 0.1);
        params.kernel_bias[0] = 0.3f;
        DocumentScorer<float> scorer(params, config, vocab, tokens);

        const std::vector<TermId> one{alpha};
        const std::vector<TermId> two{alpha, alpha};
        CHECK(scorer.QueryScore(two) == 2.0f * scorer.QueryScore(one));
        CHECK(scorer.QueryScore(std::vector<TermId>{}) == 0.0f);
        CHECK(scorer.QueryScore(std::vector<TermId>{kPad, corpus::kUnk}) == 0.0f);

        const std::vector<TermId> three{alpha, beta, zeta};
        float brute = 0.0f;
        for (TermId t : three) {
            brute += scorer.TermScores(std::vector<TermId>{t})[0];
        }
        CHECK(std::abs(scorer.QueryScore(three) - brute) <= 1e-5f);

        // the autodiff path agrees with the scorer
        Tape<float> tape;
        const auto vars = Bind(tape, params, false);
        const auto doc = PrepareDocument(vars, config, std::span<const TermId>(tokens));
        const float taped = QueryScore(vars, config, vocab, doc, std::span<const TermId>(three)).value()[0];
        CHECK(std::abs(taped - brute) <= 1e-5f);
    }
}

TEST_CASE("term scores are non-negative for any parameters") {
    const Vocabulary vocab = TinyVocab();
    std::mt19937_64 rng(41);
    const Document d3{"d3", "", "", "theta iota kappa lambda alpha", {}};
    const auto tokens = corpus::Flatten(d3, vocab, {64, 8});
    std::vector<TermId> all;
    for (TermId t = corpus::kFirstTerm; t < static_cast<TermId>(vocab.table_size()); ++t) {
        all.push_back(t);
    }
    for (int trial = 0; trial < 12; ++trial) {
        const ModelConfig config = TinyConfig(static_cast<Variant>(1 + trial % 3), 1);
        auto params = InitParams<double>(config, vocab.table_size(), 100 + trial);
        const double scale = trial < 6 ? 1.0 : 25.0;
        ForEachSlot(params, [&](const std::string& name, Tensor<double>& t) {
            if (name == "embedding") {
                return;
            }
            t = RandomTensor<double>(t.shape(), rng, scale);
        });
        DocumentScorer<double> scorer(params, config, vocab, tokens);
        for (double s : scorer.TermScores(all)) {
            CHECK(s >= 0.0);
        }
    }
}

TEST_CASE("term scores do not depend on batch composition") {
    const Vocabulary vocab = TinyVocab();
    const Document d2{"d2", "", "", "beta epsilon zeta eta", {}};
    const auto tokens = corpus::Flatten(d2, vocab, {64, 8});
    const ModelConfig config = TinyConfig(Variant::Ndrm3, 2);
    const auto params = InitParams<float>(config, vocab.table_size(), 43);
    DocumentScorer<float> scorer(params, config, vocab, tokens);
    std::vector<TermId> all;
    for (TermId t = corpus::kFirstTerm; t < static_cast<TermId>(vocab.table_size()); ++t) {
        all.push_back(t);
    }
    const auto batch = scorer.TermScores(all);
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(scorer.TermScores(std::vector<TermId>{all[i]})[0] == batch[i]);
    }
}

TEST_CASE("full model gradient check") {
    const Vocabulary vocab = TinyVocab();
    const ModelConfig config = TinyConfig(Variant::Ndrm3, 1);
    auto params = InitParams<double>(config, vocab.table_size(), 47);
    std::mt19937_64 rng(47);
    params.kernel_weight = RandomTensor<double>(params.kernel_weight.shape(), rng, 0.1);
    params.kernel_bias[0] = 0.4;
    const auto pos = corpus::Flatten(Document{"d1", "", "alpha beta", "gamma delta alpha", {}}, vocab, {64, 8});
    const auto neg = corpus::Flatten(Document{"d2", "", "", "beta epsilon zeta eta", {}}, vocab, {64, 8});
    const std::vector<TermId> query{vocab.Id("alpha"), vocab.Id("eta")};

    std::vector<Tensor<double>> flat;
    ForEachSlot(params, [&](const std::string&, const Tensor<double>& t) { flat.push_back(t); });

    const num::Objective loss = [&](Tape<double>& tape, std::span<const Var<double>> leaves) {
        ModelVars<double> vars;
        vars.layers.resize(config.num_layers);
        std::size_t next = 0;
        ForEachSlot(vars, [&](const std::string&, Var<double>& v) { v = leaves[next++]; });
        const auto dp = PrepareDocument(vars, config, std::span<const TermId>(pos));
        const auto dn = PrepareDocument(vars, config, std::span<const TermId>(neg));
        Var<double> sp = QueryScore(vars, config, vocab, dp, std::span<const TermId>(query));
        Var<double> sn = QueryScore(vars, config, vocab, dn, std::span<const TermId>(query));
        (void)tape;
        return num::Softplus(num::Sub(sn, sp));
    };
    const auto report = num::GradCheck(loss, flat, {1e-5, 1e-4, 0});
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("checkpoint") {
    ckir::testing::TempDir dir;
    const ModelConfig config = TinyConfig(Variant::Ndrm3, 2);
    const auto params = InitParams<float>(config, 15, 53);
    const std::string path = dir.File("model.ckpt");
    SaveCheckpoint(path, config, params);

    SUBCASE("round trip is bit exact") {
        const Checkpoint ck = LoadCheckpoint(path);
        CHECK(ck.config.embed_dim == config.embed_dim);
        CHECK(ck.config.variant == config.variant);
        CHECK(ck.config.kernel_mus == config.kernel_mus);
        CHECK(ck.config.kernel_sigmas == config.kernel_sigmas);
        CHECK(SerializeCheckpoint(ck.config, ck.params) == ReadFileBytes(path));
        ZipSlots(ck.params, params, [](const Tensor<float>& a, const Tensor<float>& b) {
            REQUIRE(a.shape() == b.shape());
            CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
        });
        CHECK(CheckpointDigest(ck.config, ck.params) == CheckpointDigest(config, params));
    }
    SUBCASE("truncated file") {
        const std::string bytes = ReadFileBytes(path);
        for (std::size_t cut : {std::size_t{2}, std::size_t{9}, bytes.size() / 2, bytes.size() - 1}) {
            CHECK(CaptureError([&] { ParseCheckpoint(std::string_view(bytes).substr(0, cut), "ckpt"); }) ==
                  ErrorCode::FormatError);
        }
    }
    SUBCASE("version mismatch names both versions") {
        std::string bytes = ReadFileBytes(path);
        bytes[4] = 7;
        std::string msg;
        CHECK(CaptureError([&] { ParseCheckpoint(bytes, "ckpt"); }, &msg) == ErrorCode::FormatError);
        CHECK(msg.find('7') != std::string::npos);
        CHECK(msg.find(std::to_string(kCheckpointVersion)) != std::string::npos);
    }
    SUBCASE("bad magic") {
        std::string bytes = ReadFileBytes(path);
        bytes[0] = 'X';
        CHECK(CaptureError([&] { ParseCheckpoint(bytes, "ckpt"); }) == ErrorCode::FormatError);
    }
    SUBCASE("missing file") {
        CHECK(CaptureError([&] { LoadCheckpoint(dir.File("absent")); }) == ErrorCode::IoError);
    }
}
