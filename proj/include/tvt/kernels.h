// Copyright 2026 The tvtnas Authors.
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

#include <cstdint>

#include "tvt/rng.h"
#include "tvt/tensor.h"

// Forward-only float32 kernels. Loops over independent output elements are
// OpenMP-parallel; every output element is reduced by exactly one thread in a
// fixed order, so results are bitwise identical for any thread count.
namespace tvt {

// [M x K] x [K x N] -> [M x N].
Tensor MatMul(const Tensor& a, const Tensor& b);

// Row-wise affine map y = x W^T + b with W stored [out x in]. `bias` may be null.
Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor* bias);

// 2-D cross-correlation (the kernel is not flipped):
//   y[o, i, j] = b[o] + sum_{c, u, v} w[o, c, u, v] * x[g(o)*Cg + c, i*s + u - p, j*s + v - p]
// with zero padding. Input [C_in x H x W], weight [C_out x C_in/groups x k x k],
// output [C_out x H' x W'] where H' = (H + 2p - k) / s + 1.
Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias, int stride, int pad,
              int groups = 1);

// Per-row standardization of [L x C]: (x - mean) / sqrt(var + eps), biased variance.
Tensor LayerNorm(const Tensor& x, float eps);
Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps);

// Numerically stable softmax along `axis` (negative counts from the back).
Tensor Softmax(const Tensor& x, int axis = -1);

// Bilinear resize of [C x H x W] using half-pixel centers
// (src = (dst + 0.5) * in / out - 0.5, clamped to the border).
Tensor BilinearResize(const Tensor& x, int64_t out_h, int64_t out_w);

Tensor Gelu(const Tensor& x);
Tensor Relu(const Tensor& x);
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, float c);
Tensor SumOverAxis(const Tensor& x, int axis);
Tensor Transpose2d(const Tensor& x);

double SumOfSquares(const Tensor& x);
// sqrt of the sum of squares over all elements, accumulated in double.
double L2Norm(const Tensor& x);

// Normal(0, std) resampled until inside [-2 std, 2 std].
Tensor TruncNormalInit(Rng& rng, const Shape& shape, float std);

// Thread count used by parallel kernels; 0 restores the OpenMP default.
void SetNumThreads(int n);
int NumThreads();

namespace reference {

// Serial textbook loops. Slow; kept as the oracle for the parallel kernels and
// as the baseline in the benchmark.
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias, int stride, int pad,
              int groups = 1);
Tensor BilinearResize(const Tensor& x, int64_t out_h, int64_t out_w);

}  // namespace reference

}  // namespace tvt
