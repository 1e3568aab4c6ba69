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

// Differentiable primitives recorded on a Tape.
//
// Binary elementwise ops broadcast in three ways only: equal shapes, a
// single-element operand, or a rank-1 right operand whose length equals the
// left operand's column count (row broadcast, used for bias and gain vectors).
// Everything else is a ShapeMismatch.
//
// Matrix ops view tensors through Shape::rows()/cols().

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ckir/numerics/tape.hpp"

namespace ckir::num {

/// Per-row validity flags; nonzero means the row takes part in the computation.
using Mask = std::vector<std::uint8_t>;

template <typename T>
Var<T>
Add(Var<T> a, Var<T> b);
template <typename T>
Var<T>
Sub(Var<T> a, Var<T> b);
template <typename T>
Var<T>
Mul(Var<T> a, Var<T> b);
template <typename T>
Var<T>
Div(Var<T> a, Var<T> b);

/// scale * x + shift with constant coefficients.
template <typename T>
Var<T>
Affine(Var<T> x, T scale, T shift);

/// (m x k) * (k x n)
template <typename T>
Var<T>
MatMul(Var<T> a, Var<T> b);
/// (m x k) * (n x k)^T
template <typename T>
Var<T>
MatMulNT(Var<T> a, Var<T> b);
/// (k x m)^T * (k x n)
template <typename T>
Var<T>
MatMulTN(Var<T> a, Var<T> b);

template <typename T>
Var<T>
Relu(Var<T> x);
template <typename T>
Var<T>
Tanh(Var<T> x);
template <typename T>
Var<T>
Sigmoid(Var<T> x);
template <typename T>
Var<T>
Softplus(Var<T> x);
template <typename T>
Var<T>
Log(Var<T> x);
template <typename T>
Var<T>
Exp(Var<T> x);

/// Softmax along `axis` of a rank-2 view. axis 1 normalizes each row; axis 0
/// normalizes each column over the rows flagged in `mask` (empty mask = all
/// rows) and writes zeros to the masked rows. AllMasked if no row is valid.
template <typename T>
Var<T>
Softmax(Var<T> x, int axis, const Mask& mask = {});

/// Row-wise (x - mean) / sqrt(var + eps) * gain + bias.
template <typename T>
Var<T>
LayerNorm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));

/// Same-length depthwise convolution over the rows of x (n x D) with a
/// (w x D) kernel, w odd, zero padding; tap (w-1)/2 is the centre.
template <typename T>
Var<T>
Conv1dDepthwise(Var<T> x, Var<T> kernel);

/// Rows of `table` selected by `ids`.
template <typename T>
Var<T>
EmbeddingGather(Var<T> table, std::span<const std::int32_t> ids);

/// Zeroes the rows whose mask flag is 0.
template <typename T>
Var<T>
MaskRows(Var<T> x, const Mask& mask);

/// Scales every row to unit L2 norm; all-zero rows stay zero.
template <typename T>
Var<T>
NormalizeRows(Var<T> x);

/// Gaussian kernel pooling of a similarity matrix s (m x n):
/// out[i,k] = log(eps + sum_j mask_j * exp(-(s[i,j] - mu_k)^2 / (2 sigma_k^2))).
template <typename T>
Var<T>
KernelPool(Var<T> s,
           const Mask& mask,
           std::span<const double> mus,
           std::span<const double> sigmas,
           T eps = T(1e-6));

template <typename T>
Var<T>
Sum(Var<T> x);
template <typename T>
Var<T>
Mean(Var<T> x);

}  // namespace ckir::num
