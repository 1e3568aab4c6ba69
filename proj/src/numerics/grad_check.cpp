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

#include "ckir/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace ckir::num {

namespace {

double
Evaluate(const Objective& f, const std::vector<Tensor<double>>& values) {
    Tape<double> tape;
    std::vector<Var<double>> leaves;
    leaves.reserve(values.size());
    for (const auto& v : values) {
        leaves.push_back(tape.Leaf(v));
    }
    return f(tape, leaves).value()[0];
}

}  // namespace

GradCheckReport
GradCheck(const Objective& f, std::span<const Tensor<double>> params, const GradCheckOptions& options) {
    std::vector<Tensor<double>> values(params.begin(), params.end());

    Tape<double> tape;
    std::vector<Var<double>> leaves;
    for (const auto& v : values) {
        leaves.push_back(tape.Leaf(v));
    }
    tape.Backward(f(tape, leaves));

    GradCheckReport report;
    for (std::size_t p = 0; p < values.size(); ++p) {
        const Tensor<double> analytic = tape.Grad(leaves[p]);
        const std::size_t n = values[p].size();
        const std::size_t probes = options.max_probes == 0 ? n : std::min(n, options.max_probes);

        double max_diff = 0.0, max_analytic = 0.0, max_numeric = 0.0;
        for (std::size_t q = 0; q < probes; ++q) {
            const std::size_t i = probes == n ? q : q * n / probes;
            const double saved = values[p][i];
            values[p][i] = saved + options.step;
            const double up = Evaluate(f, values);
            values[p][i] = saved - options.step;
            const double down = Evaluate(f, values);
            values[p][i] = saved;

            const double numeric = (up - down) / (2.0 * options.step);
            max_diff = std::max(max_diff, std::abs(analytic[i] - numeric));
            max_analytic = std::max(max_analytic, std::abs(analytic[i]));
            max_numeric = std::max(max_numeric, std::abs(numeric));
        }

        GradCheckEntry entry;
        entry.max_abs_diff = max_diff;
        entry.rel_error = max_diff / (max_analytic + max_numeric + 1e-12);
        entry.passed = entry.rel_error <= options.tolerance;
        report.max_rel_error = std::max(report.max_rel_error, entry.rel_error);
        report.passed = report.passed && entry.passed;
        report.params.push_back(entry);
    }
    return report;
}

}  // namespace ckir::num
