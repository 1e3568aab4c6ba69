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

#include "ckir/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ckir/common/error.hpp"

namespace ckir::num {

namespace {

[[noreturn]] void
Mismatch(const char* op, const Shape& a, const Shape& b) {
    Throw(ErrorCode::ShapeMismatch,
          std::string(op) + ": incompatible shapes " + a.ToString() + " and " + b.ToString());
}

enum class Bcast { Same, ScalarA, ScalarB, RowB };

struct Broadcast {
    Bcast mode;
    std::size_t cols;

    std::size_t
    a(std::size_t i) const {
        return mode == Bcast::ScalarA ? 0 : i;
    }
    std::size_t
    b(std::size_t i) const {
        switch (mode) {
            case Bcast::ScalarB:
                return 0;
            case Bcast::RowB:
                return i % cols;
            default:
                return i;
        }
    }
};

Broadcast
Resolve(const char* op, const Shape& a, const Shape& b, Shape& out) {
    if (a == b) {
        out = a;
        return {Bcast::Same, a.cols()};
    }
    if (b.numel() == 1) {
        out = a;
        return {Bcast::ScalarB, a.cols()};
    }
    if (a.numel() == 1) {
        out = b;
        return {Bcast::ScalarA, b.cols()};
    }
    if (b.rank() == 1 && a.rank() >= 1 && b[0] == a.cols()) {
        out = a;
        return {Bcast::RowB, a.cols()};
    }
    Mismatch(op, a, b);
}

template <typename T, typename F, typename DA, typename DB>
Var<T>
Binary(const char* op, Var<T> a, Var<T> b, F f, DA da, DB db) {
    Tape<T>& tape = *a.tape;
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    Shape shape;
    const Broadcast bc = Resolve(op, av.shape(), bv.shape(), shape);
    Tensor<T> out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = f(av[bc.a(i)], bv[bc.b(i)]);
    }
    const std::uint32_t ia = a.id;
    const std::uint32_t ib = b.id;
    return tape.Record(op, std::move(out), {a, b}, [ia, ib, bc, da, db](Tape<T>& t, std::uint32_t self) {
        const Tensor<T>& g = t.OutGrad(self);
        const Tensor<T>& x = t.value(Var<T>{&t, ia});
        const Tensor<T>& y = t.value(Var<T>{&t, ib});
        if (Tensor<T>* gx = t.GradBuffer(ia)) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                (*gx)[bc.a(i)] += g[i] * da(x[bc.a(i)], y[bc.b(i)]);
            }
        }
        if (Tensor<T>* gy = t.GradBuffer(ib)) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                (*gy)[bc.b(i)] += g[i] * db(x[bc.a(i)], y[bc.b(i)]);
            }
        }
    });
}

// `df(x, y)` is the derivative given input x and output y.
template <typename T, typename F, typename DF>
Var<T>
Unary(const char* op, Var<T> x, F f, DF df) {
    const Tensor<T>& xv = x.value();
    Tensor<T> out(xv.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = f(xv[i]);
    }
    const std::uint32_t ix = x.id;
    return x.tape->Record(op, std::move(out), {x}, [ix, df](Tape<T>& t, std::uint32_t self) {
        Tensor<T>* gx = t.GradBuffer(ix);
        if (gx == nullptr) {
            return;
        }
        const Tensor<T>& g = t.OutGrad(self);
        const Tensor<T>& xin = t.value(Var<T>{&t, ix});
        const Tensor<T>& y = t.value(Var<T>{&t, self});
        for (std::size_t i = 0; i < g.size(); ++i) {
            (*gx)[i] += g[i] * df(xin[i], y[i]);
        }
    });
}

template <typename T>
T
StableSigmoid(T x) {
    if (x >= T{0}) {
        return T{1} / (T{1} + std::exp(-x));
    }
    const T e = std::exp(x);
    return e / (T{1} + e);
}

template <typename T>
T
StableSoftplus(T x) {
    return std::max(x, T{0}) + std::log1p(std::exp(-std::abs(x)));
}

bool
Valid(const Mask& mask, std::size_t row) {
    return mask.empty() || mask[row] != 0;
}

void
CheckMask(const char* op, const Mask& mask, std::size_t rows) {
    if (!mask.empty() && mask.size() != rows) {
        Throw(ErrorCode::ShapeMismatch,
              std::string(op) + ": mask length " + std::to_string(mask.size()) + " vs " +
                  std::to_string(rows) + " rows");
    }
}

}  // namespace

template <typename T>
Var<T>
Add(Var<T> a, Var<T> b) {
    return Binary<T>(
        "add", a, b, [](T x, T y) { return x + y; }, [](T, T) { return T{1}; },
        [](T, T) { return T{1}; });
}

template <typename T>
Var<T>
Sub(Var<T> a, Var<T> b) {
    return Binary<T>(
        "sub", a, b, [](T x, T y) { return x - y; }, [](T, T) { return T{1}; },
        [](T, T) { return T{-1}; });
}

template <typename T>
Var<T>
Mul(Var<T> a, Var<T> b) {
    return Binary<T>(
        "mul", a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; },
        [](T x, T) { return x; });
}

template <typename T>
Var<T>
Div(Var<T> a, Var<T> b) {
    return Binary<T>(
        "div", a, b, [](T x, T y) { return x / y; }, [](T, T y) { return T{1} / y; },
        [](T x, T y) { return -x / (y * y); });
}

template <typename T>
Var<T>
Affine(Var<T> x, T scale, T shift) {
    return Unary<T>(
        "affine", x, [scale, shift](T v) { return scale * v + shift; },
        [scale](T, T) { return scale; });
}

template <typename T>
Var<T>
MatMul(Var<T> a, Var<T> b) {
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    if (bv.rows() != k) {
        Mismatch("matmul", av.shape(), bv.shape());
    }
    Tensor<T> out(Shape{m, n});
    for (std::size_t i = 0; i < m; ++i) {
        T* c = &out[i * n];
        for (std::size_t p = 0; p < k; ++p) {
            const T aip = av[i * k + p];
            const T* brow = &bv[p * n];
            for (std::size_t j = 0; j < n; ++j) {
                c[j] += aip * brow[j];
            }
        }
    }
    const std::uint32_t ia = a.id, ib = b.id;
    return a.tape->Record("matmul", std::move(out), {a, b}, [ia, ib, m, k, n](Tape<T>& t, std::uint32_t self) {
        const Tensor<T>& g = t.OutGrad(self);
        const Tensor<T>& A = t.value(Var<T>{&t, ia});
        const Tensor<T>& B = t.value(Var<T>{&t, ib});
        if (Tensor<T>* ga = t.GradBuffer(ia)) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    T acc{0};
                    for (std::size_t j = 0; j < n; ++j) {
                        acc += g[i * n + j] * B[p * n + j];
                    }
                    (*ga)[i * k + p] += acc;
                }
            }
        }
        if (Tensor<T>* gb = t.GradBuffer(ib)) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    const T aip = A[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) {
                        (*gb)[p * n + j] += aip * g[i * n + j];
                    }
                }
            }
        }
    });
}

template <typename T>
Var<T>
MatMulNT(Var<T> a, Var<T> b) {
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
    if (bv.cols() != k) {
        Mismatch("matmul_nt", av.shape(), bv.shape());
    }
    Tensor<T> out(Shape{m, n});
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = &av[i * k];
        for (std::size_t j = 0; j < n; ++j) {
            const T* brow = &bv[j * k];
            T acc{0};
            for (std::size_t p = 0; p < k; ++p) {
                acc += arow[p] * brow[p];
            }
            out[i * n + j] = acc;
        }
    }
    const std::uint32_t ia = a.id, ib = b.id;
    return a.tape->Record("matmul_nt", std::move(out), {a, b}, [ia, ib, m, k, n](Tape<T>& t, std::uint32_t self) {
        const Tensor<T>& g = t.OutGrad(self);
        const Tensor<T>& A = t.value(Var<T>{&t, ia});
        const Tensor<T>& B = t.value(Var<T>{&t, ib});
        Tensor<T>* ga = t.GradBuffer(ia);
        Tensor<T>* gb = t.GradBuffer(ib);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const T gij = g[i * n + j];
                if (gij == T{0}) {
                    continue;
                }
                for (std::size_t p = 0; p < k; ++p) {
                    if (ga != nullptr) {
                        (*ga)[i * k + p] += gij * B[j * k + p];
                    }
                    if (gb != nullptr) {
                        (*gb)[j * k + p] += gij * A[i * k + p];
                    }
                }
            }
        }
    });
}

template <typename T>
Var<T>
MatMulTN(Var<T> a, Var<T> b) {
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    const std::size_t k = av.rows(), m = av.cols(), n = bv.cols();
    if (bv.rows() != k) {
        Mismatch("matmul_tn", av.shape(), bv.shape());
    }
    Tensor<T> out(Shape{m, n});
    for (std::size_t p = 0; p < k; ++p) {
        const T* brow = &bv[p * n];
        for (std::size_t i = 0; i < m; ++i) {
            const T api = av[p * m + i];
            T* c = &out[i * n];
            for (std::size_t j = 0; j < n; ++j) {
                c[j] += api * brow[j];
            }
        }
    }
    const std::uint32_t ia = a.id, ib = b.id;
    return a.tape->Record("matmul_tn", std::move(out), {a, b}, [ia, ib, m, k, n](Tape<T>& t, std::uint32_t self) {
        const Tensor<T>& g = t.OutGrad(self);
        const Tensor<T>& A = t.value(Var<T>{&t, ia});
        const Tensor<T>& B = t.value(Var<T>{&t, ib});
        Tensor<T>* ga = t.GradBuffer(ia);
        Tensor<T>* gb = t.GradBuffer(ib);
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t i = 0; i < m; ++i) {
                const T* grow = &g[i * n];
                if (ga != nullptr) {
                    T acc{0};
                    for (std::size_t j = 0; j < n; ++j) {
                        acc += B[p * n + j] * grow[j];
                    }
                    (*ga)[p * m + i] += acc;
                }
                if (gb != nullptr) {
                    const T api = A[p * m + i];
                    for (std::size_t j = 0; j < n; ++j) {
                        (*gb)[p * n + j] += api * grow[j];
                    }
                }
            }
        }
    });
}

template <typename T>
Var<T>
Relu(Var<T> x) {
    return Unary<T>(
        "relu", x, [](T v) { return v > T{0} ? v : T{0}; },
        [](T v, T) { return v > T{0} ? T{1} : T{0}; });
}

template <typename T>
Var<T>
Tanh(Var<T> x) {
    return Unary<T>(
        "tanh", x, [](T v) { return std::tanh(v); }, [](T, T y) { return T{1} - y * y; });
}

template <typename T>
Var<T>
Sigmoid(Var<T> x) {
    return Unary<T>(
        "sigmoid", x, [](T v) { return StableSigmoid(v); },
        [](T, T y) { return y * (T{1} - y); });
}

template <typename T>
Var<T>
Softplus(Var<T> x) {
    return Unary<T>(
        "softplus", x, [](T v) { return StableSoftplus(v); },
        [](T v, T) { return StableSigmoid(v); });
}

template <typename T>
Var<T>
Log(Var<T> x) {
    return Unary<T>(
        "log", x, [](T v) { return std::log(v); }, [](T v, T) { return T{1} / v; });
}

template <typename T>
Var<T>
Exp(Var<T> x) {
    return Unary<T>(
        "exp", x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <typename T>
Var<T>
Softmax(Var<T> x, int axis, const Mask& mask) {
    const Tensor<T>& xv = x.value();
    const std::size_t rows = xv.rows(), cols = xv.cols();
    Tensor<T> out(xv.shape());
    if (axis == 1) {
        for (std::size_t r = 0; r < rows; ++r) {
            auto in = xv.row(r);
            auto o = out.row(r);
            const T mx = *std::max_element(in.begin(), in.end());
            T total{0};
            for (std::size_t c = 0; c < cols; ++c) {
                o[c] = std::exp(in[c] - mx);
                total += o[c];
            }
            for (std::size_t c = 0; c < cols; ++c) {
                o[c] /= total;
            }
        }
    } else if (axis == 0) {
        CheckMask("softmax", mask, rows);
        std::size_t valid = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            valid += Valid(mask, r) ? 1 : 0;
        }
        if (valid == 0) {
            Throw(ErrorCode::AllMasked, "softmax over a sequence with no valid rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            T mx = -std::numeric_limits<T>::infinity();
            for (std::size_t r = 0; r < rows; ++r) {
                if (Valid(mask, r)) {
                    mx = std::max(mx, xv.at(r, c));
                }
            }
            T total{0};
            for (std::size_t r = 0; r < rows; ++r) {
                if (Valid(mask, r)) {
                    out.at(r, c) = std::exp(xv.at(r, c) - mx);
                    total += out.at(r, c);
                }
            }
            for (std::size_t r = 0; r < rows; ++r) {
                out.at(r, c) /= total;
            }
        }
    } else {
        Throw(ErrorCode::InvalidArgument, "softmax axis must be 0 or 1");
    }
    const std::uint32_t ix = x.id;
    return x.tape->Record("softmax", std::move(out), {x}, [ix, axis, rows, cols](Tape<T>& t, std::uint32_t self) {
        Tensor<T>* gx = t.GradBuffer(ix);
        if (gx == nullptr) {
            return;
        }
        const Tensor<T>& g = t.OutGrad(self);
        const Tensor<T>& y = t.value(Var<T>{&t, self});
        if (axis == 1) {
            for (std::size_t r = 0; r < rows; ++r) {
                T dot{0};
                for (std::size_t c = 0; c < cols; ++c) {
                    dot += g.at(r, c) * y.at(r, c);
                }
                for (std::size_t c = 0; c < cols; ++c) {
                    gx->at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
                }
            }
        } else {
            // masked rows have y = 0, so they receive no gradient
            for (std::size_t c = 0; c < cols; ++c) {
                T dot{0};
                for (std::size_t r = 0; r < rows; ++r) {
                    dot += g.at(r, c) * y.at(r, c);
                }
                for (std::size_t r = 0; r < rows; ++r) {
                    gx->at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
                }
            }
        }
    });
}

template <typename T>
Var<T>
LayerNorm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
    const Tensor<T>& xv = x.value();
    const Tensor<T>& gv = gain.value();
    const Tensor<T>& bv = bias.value();
    const std::size_t rows = xv.rows(), cols = xv.cols();
    if (gv.size() != cols || bv.size() != cols) {
        Mismatch("layer_norm", xv.shape(), gv.shape());
    }
    Tensor<T> out(xv.shape());
    // normalized rows and inverse deviations, kept for the backward pass
    std::vector<T> xhat(xv.size());
    std::vector<T> inv(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        auto in = xv.row(r);
        T mean{0};
        for (T v : in) {
            mean += v;
        }
        mean /= static_cast<T>(cols);
        T var{0};
        for (T v : in) {
            var += (v - mean) * (v - mean);
        }
        var /= static_cast<T>(cols);
        inv[r] = T{1} / std::sqrt(var + eps);
        for (std::size_t c = 0; c < cols; ++c) {
            const T h = (in[c] - mean) * inv[r];
            xhat[r * cols + c] = h;
            out.at(r, c) = h * gv[c] + bv[c];
        }
    }
    const std::uint32_t ix = x.id, ig = gain.id, ib = bias.id;
    return x.tape->Record(
        "layer_norm", std::move(out), {x, gain, bias},
        [ix, ig, ib, rows, cols, xhat = std::move(xhat), inv = std::move(inv)](Tape<T>& t, std::uint32_t self) {
            const Tensor<T>& g = t.OutGrad(self);
            const Tensor<T>& gv = t.value(Var<T>{&t, ig});
            Tensor<T>* gx = t.GradBuffer(ix);
            Tensor<T>* gg = t.GradBuffer(ig);
            Tensor<T>* gb = t.GradBuffer(ib);
            std::vector<T> dh(cols);
            for (std::size_t r = 0; r < rows; ++r) {
                T mean_dh{0}, mean_dh_h{0};
                for (std::size_t c = 0; c < cols; ++c) {
                    const T gi = g.at(r, c);
                    const T h = xhat[r * cols + c];
                    if (gg != nullptr) {
                        (*gg)[c] += gi * h;
                    }
                    if (gb != nullptr) {
                        (*gb)[c] += gi;
                    }
                    dh[c] = gi * gv[c];
                    mean_dh += dh[c];
                    mean_dh_h += dh[c] * h;
                }
                if (gx == nullptr) {
                    continue;
                }
                mean_dh /= static_cast<T>(cols);
                mean_dh_h /= static_cast<T>(cols);
                for (std::size_t c = 0; c < cols; ++c) {
                    gx->at(r, c) += inv[r] * (dh[c] - mean_dh - xhat[r * cols + c] * mean_dh_h);
                }
            }
        });
}

template <typename T>
Var<T>
Conv1dDepthwise(Var<T> x, Var<T> kernel) {
    const Tensor<T>& xv = x.value();
    const Tensor<T>& kv = kernel.value();
    const std::size_t n = xv.rows(), d = xv.cols(), w = kv.rows();
    if (kv.cols() != d || w % 2 == 0) {
        Mismatch("conv1d_depthwise", xv.shape(), kv.shape());
    }
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(w / 2);
    Tensor<T> out(Shape{n, d});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t tap = 0; tap < w; ++tap) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + tap) - half;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) {
                continue;
            }
            auto krow = kv.row(tap);
            auto xrow = xv.row(static_cast<std::size_t>(src));
            auto o = out.row(i);
            for (std::size_t c = 0; c < d; ++c) {
                o[c] += krow[c] * xrow[c];
            }
        }
    }
    const std::uint32_t ix = x.id, ik = kernel.id;
    return x.tape->Record("conv1d_depthwise", std::move(out), {x, kernel},
                          [ix, ik, n, d, w, half](Tape<T>& t, std::uint32_t self) {
                              const Tensor<T>& g = t.OutGrad(self);
                              const Tensor<T>& X = t.value(Var<T>{&t, ix});
                              const Tensor<T>& K = t.value(Var<T>{&t, ik});
                              Tensor<T>* gx = t.GradBuffer(ix);
                              Tensor<T>* gk = t.GradBuffer(ik);
                              for (std::size_t i = 0; i < n; ++i) {
                                  for (std::size_t tap = 0; tap < w; ++tap) {
                                      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + tap) - half;
                                      if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) {
                                          continue;
                                      }
                                      const auto s = static_cast<std::size_t>(src);
                                      for (std::size_t c = 0; c < d; ++c) {
                                          const T gi = g.at(i, c);
                                          if (gx != nullptr) {
                                              gx->at(s, c) += K.at(tap, c) * gi;
                                          }
                                          if (gk != nullptr) {
                                              gk->at(tap, c) += X.at(s, c) * gi;
                                          }
                                      }
                                  }
                              }
                          });
}

template <typename T>
Var<T>
EmbeddingGather(Var<T> table, std::span<const std::int32_t> ids) {
    const Tensor<T>& tv = table.value();
    const std::size_t d = tv.cols();
    std::vector<std::int32_t> rows(ids.begin(), ids.end());
    Tensor<T> out(Shape{rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= tv.rows()) {
            Throw(ErrorCode::InvalidArgument,
                  "embedding id " + std::to_string(rows[i]) + " outside table of " +
                      std::to_string(tv.rows()) + " rows");
        }
        std::copy_n(tv.row(static_cast<std::size_t>(rows[i])).begin(), d, out.row(i).begin());
    }
    const std::uint32_t it = table.id;
    return table.tape->Record("embedding_gather", std::move(out), {table},
                              [it, d, rows = std::move(rows)](Tape<T>& t, std::uint32_t self) {
                                  Tensor<T>* gt = t.GradBuffer(it);
                                  if (gt == nullptr) {
                                      return;
                                  }
                                  const Tensor<T>& g = t.OutGrad(self);
                                  for (std::size_t i = 0; i < rows.size(); ++i) {
                                      auto dst = gt->row(static_cast<std::size_t>(rows[i]));
                                      auto src = g.row(i);
                                      for (std::size_t c = 0; c < d; ++c) {
                                          dst[c] += src[c];
                                      }
                                  }
                              });
}

template <typename T>
Var<T>
MaskRows(Var<T> x, const Mask& mask) {
    const Tensor<T>& xv = x.value();
    CheckMask("mask_rows", mask, xv.rows());
    Tensor<T> out = xv;
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        if (!Valid(mask, r)) {
            std::fill(out.row(r).begin(), out.row(r).end(), T{0});
        }
    }
    const std::uint32_t ix = x.id;
    return x.tape->Record("mask_rows", std::move(out), {x}, [ix, mask](Tape<T>& t, std::uint32_t self) {
        Tensor<T>* gx = t.GradBuffer(ix);
        if (gx == nullptr) {
            return;
        }
        const Tensor<T>& g = t.OutGrad(self);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            if (!Valid(mask, r)) {
                continue;
            }
            for (std::size_t c = 0; c < g.cols(); ++c) {
                gx->at(r, c) += g.at(r, c);
            }
        }
    });
}

template <typename T>
Var<T>
NormalizeRows(Var<T> x) {
    const Tensor<T>& xv = x.value();
    const std::size_t rows = xv.rows(), cols = xv.cols();
    Tensor<T> out(xv.shape());
    std::vector<T> norms(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        T sq{0};
        for (T v : xv.row(r)) {
            sq += v * v;
        }
        norms[r] = std::sqrt(sq);
        if (norms[r] > T{0}) {
            for (std::size_t c = 0; c < cols; ++c) {
                out.at(r, c) = xv.at(r, c) / norms[r];
            }
        }
    }
    const std::uint32_t ix = x.id;
    return x.tape->Record("normalize_rows", std::move(out), {x},
                          [ix, rows, cols, norms = std::move(norms)](Tape<T>& t, std::uint32_t self) {
                              Tensor<T>* gx = t.GradBuffer(ix);
                              if (gx == nullptr) {
                                  return;
                              }
                              const Tensor<T>& g = t.OutGrad(self);
                              const Tensor<T>& y = t.value(Var<T>{&t, self});
                              for (std::size_t r = 0; r < rows; ++r) {
                                  if (norms[r] == T{0}) {
                                      continue;
                                  }
                                  T dot{0};
                                  for (std::size_t c = 0; c < cols; ++c) {
                                      dot += g.at(r, c) * y.at(r, c);
                                  }
                                  for (std::size_t c = 0; c < cols; ++c) {
                                      gx->at(r, c) += (g.at(r, c) - y.at(r, c) * dot) / norms[r];
                                  }
                              }
                          });
}

template <typename T>
Var<T>
KernelPool(Var<T> s, const Mask& mask, std::span<const double> mus, std::span<const double> sigmas, T eps) {
    const Tensor<T>& sv = s.value();
    const std::size_t m = sv.rows(), n = sv.cols(), nk = mus.size();
    CheckMask("kernel_pool", mask, n);
    if (sigmas.size() != nk) {
        Throw(ErrorCode::ShapeMismatch, "kernel_pool: mus and sigmas differ in length");
    }
    std::vector<T> mu(mus.begin(), mus.end());
    std::vector<T> inv_var(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        inv_var[k] = T{1} / (static_cast<T>(sigmas[k]) * static_cast<T>(sigmas[k]));
    }
    Tensor<T> out(Shape{m, nk});
    std::vector<T> mass(m * nk);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < nk; ++k) {
            T total{0};
            for (std::size_t j = 0; j < n; ++j) {
                if (!Valid(mask, j)) {
                    continue;
                }
                const T diff = sv.at(i, j) - mu[k];
                total += std::exp(-diff * diff * inv_var[k] / T{2});
            }
            mass[i * nk + k] = total;
            out.at(i, k) = std::log(eps + total);
        }
    }
    const std::uint32_t is = s.id;
    return s.tape->Record(
        "kernel_pool", std::move(out), {s},
        [is, m, n, nk, eps, mask, mu = std::move(mu), inv_var = std::move(inv_var), mass = std::move(mass)](
            Tape<T>& t, std::uint32_t self) {
            Tensor<T>* gs = t.GradBuffer(is);
            if (gs == nullptr) {
                return;
            }
            const Tensor<T>& g = t.OutGrad(self);
            const Tensor<T>& S = t.value(Var<T>{&t, is});
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t k = 0; k < nk; ++k) {
                    const T coef = g.at(i, k) / (eps + mass[i * nk + k]);
                    if (coef == T{0}) {
                        continue;
                    }
                    for (std::size_t j = 0; j < n; ++j) {
                        if (!Valid(mask, j)) {
                            continue;
                        }
                        const T diff = S.at(i, j) - mu[k];
                        const T e = std::exp(-diff * diff * inv_var[k] / T{2});
                        gs->at(i, j) += coef * e * (-diff * inv_var[k]);
                    }
                }
            }
        });
}

template <typename T>
Var<T>
Sum(Var<T> x) {
    const Tensor<T>& xv = x.value();
    T total{0};
    for (T v : xv.values()) {
        total += v;
    }
    const std::uint32_t ix = x.id;
    return x.tape->Record("sum", Tensor<T>::Scalar(total), {x}, [ix](Tape<T>& t, std::uint32_t self) {
        Tensor<T>* gx = t.GradBuffer(ix);
        if (gx == nullptr) {
            return;
        }
        const T g = t.OutGrad(self)[0];
        for (T& v : gx->values()) {
            v += g;
        }
    });
}

template <typename T>
Var<T>
Mean(Var<T> x) {
    const T n = static_cast<T>(x.value().size());
    return Affine(Sum(x), T{1} / n, T{0});
}

#define CKIR_INSTANTIATE_OPS(T)                                                                  \
    template Var<T> Add(Var<T>, Var<T>);                                                         \
    template Var<T> Sub(Var<T>, Var<T>);                                                         \
    template Var<T> Mul(Var<T>, Var<T>);                                                         \
    template Var<T> Div(Var<T>, Var<T>);                                                         \
    template Var<T> Affine(Var<T>, T, T);                                                        \
    template Var<T> MatMul(Var<T>, Var<T>);                                                      \
    template Var<T> MatMulNT(Var<T>, Var<T>);                                                    \
    template Var<T> MatMulTN(Var<T>, Var<T>);                                                    \
    template Var<T> Relu(Var<T>);                                                                \
    template Var<T> Tanh(Var<T>);                                                                \
    template Var<T> Sigmoid(Var<T>);                                                             \
    template Var<T> Softplus(Var<T>);                                                            \
    template Var<T> Log(Var<T>);                                                                 \
    template Var<T> Exp(Var<T>);                                                                 \
    template Var<T> Softmax(Var<T>, int, const Mask&);                                           \
    template Var<T> LayerNorm(Var<T>, Var<T>, Var<T>, T);                                        \
    template Var<T> Conv1dDepthwise(Var<T>, Var<T>);                                             \
    template Var<T> EmbeddingGather(Var<T>, std::span<const std::int32_t>);                      \
    template Var<T> MaskRows(Var<T>, const Mask&);                                               \
    template Var<T> NormalizeRows(Var<T>);                                                       \
    template Var<T> KernelPool(Var<T>, const Mask&, std::span<const double>, std::span<const double>, T); \
    template Var<T> Sum(Var<T>);                                                                 \
    template Var<T> Mean(Var<T>);

CKIR_INSTANTIATE_OPS(float)
CKIR_INSTANTIATE_OPS(double)

}  // namespace ckir::num
