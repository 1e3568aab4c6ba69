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

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ckir/numerics/tape.hpp"

namespace ckir::num {

/// Builds a scalar loss from leaves bound to the checked parameters.
using Objective = std::function<Var<double>(Tape<double>&, std::span<const Var<double>>)>;

struct GradCheckEntry {
    double max_abs_diff = 0.0;
    double rel_error = 0.0;
    bool passed = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> params;
    double max_rel_error = 0.0;
    bool passed = true;
};

struct GradCheckOptions {
    double step = 1e-5;
    double tolerance = 1e-5;
    /// Upper bound on probed elements per parameter; 0 probes all of them.
    /// Probes are spread evenly over the parameter when capped.
    std::size_t max_probes = 0;
};

/// Compares tape gradients against central differences. The error of one
/// parameter is max|analytic - numeric| / (max|analytic| + max|numeric| + 1e-12)
/// over its probed elements.
GradCheckReport
GradCheck(const Objective& f, std::span<const Tensor<double>> params, const GradCheckOptions& options = {});

}  // namespace ckir::num
