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

#include "tvt/kernels.h"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tvt/error.h"

namespace tvt {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr int64_t kParallelWork = 1 << 15;

void RequireRank(const Tensor& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw Error(ErrorKind::kDimension, std::string(what) + " expects rank " +
                                           std::to_string(rank) + ", got " +
                                           ShapeString(t.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorKind::kDimension, std::string(what) + ": shape mismatch " +
                                           ShapeString(a.shape()) + " vs " +
                                           ShapeString(b.shape()));
  }
}

struct ConvGeometry {
  int64_t c_in, h, w, c_out, k, out_h, out_w, group_in, group_out;
};

ConvGeometry CheckConv(const Tensor& x, const Tensor& weight, const Tensor* bias, int stride,
                       int pad, int groups) {
  RequireRank(x, 3, "conv2d input");
  RequireRank(weight, 4, "conv2d weight");
  if (stride < 1 || pad < 0 || groups < 1) {
    throw Error(ErrorKind::kDimension, "conv2d needs stride >= 1, pad >= 0, groups >= 1");
  }
  ConvGeometry g{};
  g.c_in = x.dim(0);
  g.h = x.dim(1);
  g.w = x.dim(2);
  g.c_out = weight.dim(0);
  g.k = weight.dim(2);
  if (weight.dim(3) != g.k) {
    throw Error(ErrorKind::kDimension, "conv2d kernel must be square, got " +
                                           ShapeString(weight.shape()));
  }
  if (g.c_in % groups != 0 || g.c_out % groups != 0 || weight.dim(1) != g.c_in / groups) {
    throw Error(ErrorKind::kDimension, "conv2d channel mismatch: input " +
                                           ShapeString(x.shape()) + ", weight " +
                                           ShapeString(weight.shape()) + ", groups " +
                                           std::to_string(groups));
  }
  if (g.k > g.h + 2 * pad || g.k > g.w + 2 * pad) {
    throw Error(ErrorKind::kDimension, "conv2d kernel " + ShapeString(weight.shape()) +
                                           " larger than padded input " +
                                           ShapeString(x.shape()));
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != g.c_out)) {
    throw Error(ErrorKind::kDimension, "conv2d bias shape " + ShapeString(bias->shape()));
  }
  g.out_h = (g.h + 2 * pad - g.k) / stride + 1;
  g.out_w = (g.w + 2 * pad - g.k) / stride + 1;
  g.group_in = g.c_in / groups;
  g.group_out = g.c_out / groups;
  return g;
}

}  // namespace

void SetNumThreads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
#else
  (void)n;
#endif
}

int NumThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "matmul lhs");
  RequireRank(b, 2, "matmul rhs");
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw Error(ErrorKind::kDimension, "matmul inner dimensions differ: " +
                                           ShapeString(a.shape()) + " x " +
                                           ShapeString(b.shape()));
  }
  Tensor out({m, n});
  const float* pa = a.data().data();
  const float* pb = b.data().data();
  float* pc = out.mutable_data().data();
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (int64_t i = 0; i < m; ++i) {
    float* row = pc + i * n;
    for (int64_t p = 0; p < k; ++p) {
      const float av = pa[i * k + p];
      const float* brow = pb + p * n;
      for (int64_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  return out;
}

Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor* bias) {
  RequireRank(x, 2, "linear input");
  RequireRank(weight, 2, "linear weight");
  const int64_t rows = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
  if (weight.dim(1) != in) {
    throw Error(ErrorKind::kDimension, "linear: input " + ShapeString(x.shape()) +
                                           " vs weight " + ShapeString(weight.shape()));
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != out_dim)) {
    throw Error(ErrorKind::kDimension, "linear bias shape " + ShapeString(bias->shape()));
  }
  Tensor out({rows, out_dim});
  const float* px = x.data().data();
  const float* pw = weight.data().data();
  const float* pbias = bias ? bias->data().data() : nullptr;
  float* po = out.mutable_data().data();
#pragma omp parallel for schedule(static) if (rows * in * out_dim > kParallelWork)
  for (int64_t r = 0; r < rows; ++r) {
    const float* xr = px + r * in;
    for (int64_t o = 0; o < out_dim; ++o) {
      const float* wr = pw + o * in;
      float acc = 0.0f;
      for (int64_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
      po[r * out_dim + o] = acc + (pbias ? pbias[o] : 0.0f);
    }
  }
  return out;
}

Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias, int stride, int pad,
              int groups) {
  const ConvGeometry g = CheckConv(x, weight, bias, stride, pad, groups);
  const int64_t patch = g.group_in * g.k * g.k;
  const int64_t pixels = g.out_h * g.out_w;
  Tensor out({g.c_out, g.out_h, g.out_w});
  const float* px = x.data().data();
  const float* pw = weight.data().data();
  float* po = out.mutable_data().data();

  // im2col per group, then one GEMM-shaped loop per group.
  std::vector<float> cols(static_cast<size_t>(patch * pixels));
  for (int64_t grp = 0; grp < groups; ++grp) {
    const int64_t c0 = grp * g.group_in;
#pragma omp parallel for schedule(static) if (patch * pixels > kParallelWork)
    for (int64_t row = 0; row < patch; ++row) {
      const int64_t c = row / (g.k * g.k);
      const int64_t u = (row / g.k) % g.k;
      const int64_t v = row % g.k;
      const float* plane = px + (c0 + c) * g.h * g.w;
      float* dst = cols.data() + row * pixels;
      for (int64_t i = 0; i < g.out_h; ++i) {
        const int64_t yy = i * stride + u - pad;
        for (int64_t j = 0; j < g.out_w; ++j) {
          const int64_t xx = j * stride + v - pad;
          dst[i * g.out_w + j] =
              (yy >= 0 && yy < g.h && xx >= 0 && xx < g.w) ? plane[yy * g.w + xx] : 0.0f;
        }
      }
    }
    const int64_t o0 = grp * g.group_out;
#pragma omp parallel for schedule(static) if (g.group_out * patch * pixels > kParallelWork)
    for (int64_t o = 0; o < g.group_out; ++o) {
      float* dst = po + (o0 + o) * pixels;
      const float* wrow = pw + (o0 + o) * patch;
      for (int64_t p = 0; p < patch; ++p) {
        const float wv = wrow[p];
        const float* src = cols.data() + p * pixels;
        for (int64_t q = 0; q < pixels; ++q) dst[q] += wv * src[q];
      }
      if (bias) {
        const float b = (*bias)[o0 + o];
        for (int64_t q = 0; q < pixels; ++q) dst[q] += b;
      }
    }
  }
  return out;
}

Tensor LayerNorm(const Tensor& x, float eps) {
  RequireRank(x, 2, "layernorm input");
  if (!(eps > 0.0f)) throw Error(ErrorKind::kDimension, "layernorm eps must be positive");
  const int64_t rows = x.dim(0), cols = x.dim(1);
  Tensor out(x.shape());
  const float* px = x.data().data();
  float* po = out.mutable_data().data();
#pragma omp parallel for schedule(static) if (rows * cols > kParallelWork)
  for (int64_t r = 0; r < rows; ++r) {
    const float* xr = px + r * cols;
    double mean = 0.0;
    for (int64_t c = 0; c < cols; ++c) mean += xr[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (int64_t c = 0; c < cols; ++c) {
      const double d = xr[c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int64_t c = 0; c < cols; ++c) {
      po[r * cols + c] = static_cast<float>((xr[c] - mean) * inv);
    }
  }
  return out;
}

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
  Tensor out = LayerNorm(x, eps);
  const int64_t rows = x.dim(0), cols = x.dim(1);
  if (gamma.size() != cols || beta.size() != cols) {
    throw Error(ErrorKind::kDimension, "layernorm affine shape mismatch for " +
                                           ShapeString(x.shape()));
  }
  float* po = out.mutable_data().data();
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t c = 0; c < cols; ++c) {
      po[r * cols + c] = po[r * cols + c] * gamma[c] + beta[c];
    }
  }
  return out;
}

Tensor Softmax(const Tensor& x, int axis) {
  if (axis < 0) axis += x.rank();
  const int64_t n = x.dim(axis);
  int64_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= x.dim(a);
  for (int a = axis + 1; a < x.rank(); ++a) inner *= x.dim(a);
  Tensor out(x.shape());
  const float* px = x.data().data();
  float* po = out.mutable_data().data();
#pragma omp parallel for schedule(static) if (outer * n * inner > kParallelWork)
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const float* src = px + o * n * inner + in;
      float* dst = po + o * n * inner + in;
      float mx = src[0];
      for (int64_t i = 1; i < n; ++i) mx = std::max(mx, src[i * inner]);
      double total = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        const float e = std::exp(src[i * inner] - mx);
        dst[i * inner] = e;
        total += e;
      }
      const float inv = static_cast<float>(1.0 / total);
      for (int64_t i = 0; i < n; ++i) dst[i * inner] *= inv;
    }
  }
  return out;
}

Tensor BilinearResize(const Tensor& x, int64_t out_h, int64_t out_w) {
  RequireRank(x, 3, "bilinear_resize input");
  if (out_h < 1 || out_w < 1) {
    throw Error(ErrorKind::kDimension, "bilinear_resize output size must be positive");
  }
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h == out_h && w == out_w) return x;

  struct Tap {
    int64_t lo, hi;
    float frac;
  };
  auto taps = [](int64_t in, int64_t out) {
    std::vector<Tap> t(static_cast<size_t>(out));
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (int64_t i = 0; i < out; ++i) {
      double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
      if (src < 0.0) src = 0.0;
      int64_t lo = static_cast<int64_t>(src);
      if (lo > in - 1) lo = in - 1;
      const int64_t hi = std::min(lo + 1, in - 1);
      t[static_cast<size_t>(i)] = {lo, hi, static_cast<float>(src - static_cast<double>(lo))};
    }
    return t;
  };
  const std::vector<Tap> ty = taps(h, out_h);
  const std::vector<Tap> tx = taps(w, out_w);

  Tensor out({c, out_h, out_w});
  const float* px = x.data().data();
  float* po = out.mutable_data().data();
#pragma omp parallel for schedule(static) if (c * out_h * out_w > kParallelWork)
  for (int64_t ch = 0; ch < c; ++ch) {
    const float* plane = px + ch * h * w;
    float* dst = po + ch * out_h * out_w;
    for (int64_t i = 0; i < out_h; ++i) {
      const Tap& a = ty[static_cast<size_t>(i)];
      for (int64_t j = 0; j < out_w; ++j) {
        const Tap& b = tx[static_cast<size_t>(j)];
        const float top = plane[a.lo * w + b.lo] * (1.0f - b.frac) + plane[a.lo * w + b.hi] * b.frac;
        const float bot = plane[a.hi * w + b.lo] * (1.0f - b.frac) + plane[a.hi * w + b.hi] * b.frac;
        dst[i * out_w + j] = top * (1.0f - a.frac) + bot * a.frac;
      }
    }
  }
  return out;
}

Tensor Gelu(const Tensor& x) {
  Tensor out(x.shape());
  auto src = x.data();
  auto dst = out.mutable_data();
  for (size_t i = 0; i < src.size(); ++i) {
    dst[i] = 0.5f * src[i] * (1.0f + std::erf(src[i] * 0.70710678118654752f));
  }
  return out;
}

Tensor Relu(const Tensor& x) {
  Tensor out(x.shape());
  auto src = x.data();
  auto dst = out.mutable_data();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
  return out;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "add");
  Tensor out(a.shape());
  auto dst = out.mutable_data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] = a.data()[i] + b.data()[i];
  return out;
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  Tensor out(a.shape());
  auto dst = out.mutable_data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] = a.data()[i] * b.data()[i];
  return out;
}

Tensor Scale(const Tensor& x, float c) {
  Tensor out(x.shape());
  auto dst = out.mutable_data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] = x.data()[i] * c;
  return out;
}

Tensor SumOverAxis(const Tensor& x, int axis) {
  if (axis < 0) axis += x.rank();
  const int64_t n = x.dim(axis);
  int64_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= x.dim(a);
  for (int a = axis + 1; a < x.rank(); ++a) inner *= x.dim(a);
  Shape shape;
  for (int a = 0; a < x.rank(); ++a) {
    if (a != axis) shape.push_back(x.dim(a));
  }
  if (shape.empty()) shape.push_back(1);
  Tensor out(shape);
  const float* px = x.data().data();
  float* po = out.mutable_data().data();
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t i = 0; i < n; ++i) {
      const float* src = px + (o * n + i) * inner;
      float* dst = po + o * inner;
      for (int64_t in = 0; in < inner; ++in) dst[in] += src[in];
    }
  }
  return out;
}

Tensor Transpose2d(const Tensor& x) {
  RequireRank(x, 2, "transpose");
  const int64_t r = x.dim(0), c = x.dim(1);
  Tensor out({c, r});
  for (int64_t i = 0; i < r; ++i) {
    for (int64_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
  }
  return out;
}

double SumOfSquares(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += static_cast<double>(v) * v;
  return acc;
}

double L2Norm(const Tensor& x) { return std::sqrt(SumOfSquares(x)); }

Tensor TruncNormalInit(Rng& rng, const Shape& shape, float std) {
  if (!(std > 0.0f)) throw Error(ErrorKind::kConfig, "trunc_normal_init needs std > 0");
  Tensor out(shape);
  for (float& v : out.mutable_data()) {
    double z = rng.Normal();
    while (z < -2.0 || z > 2.0) z = rng.Normal();
    v = static_cast<float>(z * std);
  }
  return out;
}

namespace reference {

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "matmul lhs");
  RequireRank(b, 2, "matmul rhs");
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw Error(ErrorKind::kDimension, "matmul inner dimensions differ: " +
                                           ShapeString(a.shape()) + " x " +
                                           ShapeString(b.shape()));
  }
  Tensor out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (int64_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      out[i * n + j] = acc;
    }
  }
  return out;
}

Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias, int stride, int pad,
              int groups) {
  const ConvGeometry g = CheckConv(x, weight, bias, stride, pad, groups);
  Tensor out({g.c_out, g.out_h, g.out_w});
  for (int64_t o = 0; o < g.c_out; ++o) {
    const int64_t grp = o / g.group_out;
    for (int64_t i = 0; i < g.out_h; ++i) {
      for (int64_t j = 0; j < g.out_w; ++j) {
        float acc = bias ? (*bias)[o] : 0.0f;
        for (int64_t c = 0; c < g.group_in; ++c) {
          for (int64_t u = 0; u < g.k; ++u) {
            for (int64_t v = 0; v < g.k; ++v) {
              const int64_t yy = i * stride + u - pad;
              const int64_t xx = j * stride + v - pad;
              if (yy < 0 || yy >= g.h || xx < 0 || xx >= g.w) continue;
              acc += weight.at({o, c, u, v}) * x.at({grp * g.group_in + c, yy, xx});
            }
          }
        }
        out[(o * g.out_h + i) * g.out_w + j] = acc;
      }
    }
  }
  return out;
}

Tensor BilinearResize(const Tensor& x, int64_t out_h, int64_t out_w) {
  RequireRank(x, 3, "bilinear_resize input");
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out({c, out_h, out_w});
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t i = 0; i < out_h; ++i) {
      for (int64_t j = 0; j < out_w; ++j) {
        const double sy = std::max(0.0, (i + 0.5) * h / out_h - 0.5);
        const double sx = std::max(0.0, (j + 0.5) * w / out_w - 0.5);
        const int64_t y0 = std::min<int64_t>(static_cast<int64_t>(std::floor(sy)), h - 1);
        const int64_t x0 = std::min<int64_t>(static_cast<int64_t>(std::floor(sx)), w - 1);
        const int64_t y1 = std::min(y0 + 1, h - 1);
        const int64_t x1 = std::min(x0 + 1, w - 1);
        const double fy = sy - y0, fx = sx - x0;
        const double v = (1 - fy) * (1 - fx) * x.at({ch, y0, x0}) +
                         (1 - fy) * fx * x.at({ch, y0, x1}) +
                         fy * (1 - fx) * x.at({ch, y1, x0}) + fy * fx * x.at({ch, y1, x1});
        out[(ch * out_h + i) * out_w + j] = static_cast<float>(v);
      }
    }
  }
  return out;
}

}  // namespace reference

}  // namespace tvt
