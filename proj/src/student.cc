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

#include "tvt/student.h"

#include <cmath>
#include <string>
#include <vector>

#include "tvt/error.h"
#include "tvt/kernels.h"

namespace tvt {

namespace {

enum class Init { kTruncNormal, kZeros, kOnes };

struct Builder {
  WeightMap weights;
  Rng root;
  uint64_t next = 0;

  void Add(const std::string& name, Shape shape, Init init) {
    Rng rng = root.Child(next++);
    switch (init) {
      case Init::kTruncNormal:
        weights.Add(name, TruncNormalInit(rng, shape, kInitStd));
        break;
      case Init::kZeros:
        weights.Add(name, Tensor::Zeros(std::move(shape)));
        break;
      case Init::kOnes:
        weights.Add(name, Tensor::Full(std::move(shape), 1.0f));
        break;
    }
  }

  void AddLinear(const std::string& prefix, int64_t out, int64_t in) {
    Add(prefix + ".weight", {out, in}, Init::kTruncNormal);
    Add(prefix + ".bias", {out}, Init::kZeros);
  }

  void AddNorm(const std::string& prefix, int64_t width) {
    Add(prefix + ".weight", {width}, Init::kOnes);
    Add(prefix + ".bias", {width}, Init::kZeros);
  }
};

std::string BlockPrefix(int b) { return "blocks." + std::to_string(b); }

// [T x W] tokens -> [T x W] attention output before the projection.
Tensor MultiHeadAttention(const Tensor& qkv, int heads, int block,
                          const AttentionObserver& observer) {
  const int64_t t = qkv.dim(0);
  const int64_t width = qkv.dim(1) / 3;
  const int64_t hd = width / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
  const float* p = qkv.data().data();
  Tensor out({t, width});
  float* po = out.mutable_data().data();
  std::vector<float> logits(static_cast<size_t>(t * t));
  for (int h = 0; h < heads; ++h) {
    const int64_t q0 = h * hd, k0 = width + h * hd, v0 = 2 * width + h * hd;
    for (int64_t i = 0; i < t; ++i) {
      const float* q = p + i * 3 * width + q0;
      for (int64_t j = 0; j < t; ++j) {
        const float* k = p + j * 3 * width + k0;
        float dot = 0.0f;
        for (int64_t c = 0; c < hd; ++c) dot += q[c] * k[c];
        logits[static_cast<size_t>(i * t + j)] = dot * scale;
      }
    }
    const Tensor probs = Softmax(Tensor({t, t}, logits), -1);
    if (observer) observer(block, h, probs);
    const float* pa = probs.data().data();
    for (int64_t i = 0; i < t; ++i) {
      float* dst = po + i * width + h * hd;
      for (int64_t j = 0; j < t; ++j) {
        const float a = pa[i * t + j];
        const float* v = p + j * 3 * width + v0;
        for (int64_t c = 0; c < hd; ++c) dst[c] += a * v[c];
      }
    }
  }
  return out;
}

Tensor EncoderBlock(const WeightMap& w, int b, int heads, const Tensor& x,
                    const AttentionObserver& observer) {
  const std::string pre = BlockPrefix(b);
  auto get = [&](const std::string& suffix) -> const Tensor& { return w.Get(pre + suffix); };

  Tensor h = LayerNorm(x, get(".norm1.weight"), get(".norm1.bias"), kLayerNormEps);
  Tensor qkv = Linear(h, get(".attn.qkv.weight"), &get(".attn.qkv.bias"));
  Tensor attn = MultiHeadAttention(qkv, heads, b, observer);
  Tensor y = Add(x, Linear(attn, get(".attn.proj.weight"), &get(".attn.proj.bias")));

  h = LayerNorm(y, get(".norm2.weight"), get(".norm2.bias"), kLayerNormEps);
  h = Gelu(Linear(h, get(".mlp.fc1.weight"), &get(".mlp.fc1.bias")));
  return Add(y, Linear(h, get(".mlp.fc2.weight"), &get(".mlp.fc2.bias")));
}

// Rows [first, first + count) of a [T x W] matrix.
Tensor Rows(const Tensor& x, int64_t first, int64_t count) {
  const int64_t w = x.dim(1);
  auto begin = x.values().begin() + first * w;
  return Tensor({count, w}, std::vector<float>(begin, begin + count * w));
}

Tensor ConcatRows(const Tensor& a, const Tensor& b) {
  std::vector<float> data(a.values());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor({a.dim(0) + b.dim(0), a.dim(1)}, std::move(data));
}

// [T x W] patch tokens <-> [W x P x P] grid.
Tensor TokensToGrid(const Tensor& tokens, int64_t grid) {
  return Transpose2d(tokens).Reshape({tokens.dim(1), grid, grid});
}

Tensor GridToTokens(const Tensor& grid) {
  return Transpose2d(grid.Reshape({grid.dim(0), grid.dim(1) * grid.dim(2)}));
}

Tensor Embed(const StudentModel& m, const Tensor& image) {
  const Genome& g = m.genome;
  const WeightMap& w = m.weights;
  const int64_t grid = g.image_size / g.patch_size;
  Tensor patches = Conv2d(image, w.Get("patch_embed.weight"), &w.Get("patch_embed.bias"),
                          g.patch_size, 0);
  Tensor tokens = GridToTokens(patches);
  if (g.family == Family::kFlatViT) {
    return Add(ConcatRows(w.Get("cls_token"), tokens), w.Get("pos_embed"));
  }
  tokens = Add(tokens, GridToTokens(w.Get("pos_embed").Reshape({g.embed_dim, grid, grid})));
  return ConcatRows(w.Get("cls_token"), tokens);
}

Tensor Pool(const StudentModel& m, int stage, const Tensor& x) {
  const Genome& g = m.genome;
  const WeightMap& w = m.weights;
  const std::string pre = "pools." + std::to_string(stage);
  const int64_t grid = g.StageGrid(stage);
  const int width = g.StageWidth(stage);
  Tensor spatial = TokensToGrid(Rows(x, 1, grid * grid), grid);
  Tensor pooled = Conv2d(spatial, w.Get(pre + ".conv.weight"), &w.Get(pre + ".conv.bias"), 2, 1,
                         width);
  Tensor cls = Linear(Rows(x, 0, 1), w.Get(pre + ".fc.weight"), &w.Get(pre + ".fc.bias"));
  return ConcatRows(cls, GridToTokens(pooled));
}

// Token sequence [T x W] after running blocks 0..last.
Tensor RunBlocks(const StudentModel& m, const Tensor& image, int last,
                 const AttentionObserver& observer) {
  const Genome& g = m.genome;
  Tensor x = Embed(m, image);
  int stage = 0;
  for (int b = 0; b <= last; ++b) {
    const int s = g.StageOfBlock(b);
    while (stage < s) {
      x = Pool(m, stage, x);
      ++stage;
    }
    x = EncoderBlock(m.weights, b, g.heads[static_cast<size_t>(b)], x, observer);
  }
  return x;
}

void CheckBatch(const Genome& g, const Tensor& batch) {
  if (batch.rank() != 4 || batch.dim(1) != g.in_channels || batch.dim(2) != g.image_size ||
      batch.dim(3) != g.image_size) {
    throw Error(ErrorKind::kDimension,
                "student expects [B x " + std::to_string(g.in_channels) + " x " +
                    std::to_string(g.image_size) + " x " + std::to_string(g.image_size) +
                    "], got " + ShapeString(batch.shape()));
  }
}

}  // namespace

StudentModel BuildStudent(const Genome& g, uint64_t seed) {
  ValidateGenome(g);
  Builder b{WeightMap{}, Rng(seed)};
  const int64_t e = g.embed_dim;
  const int64_t grid = g.image_size / g.patch_size;

  b.Add("patch_embed.weight", {e, g.in_channels, g.patch_size, g.patch_size}, Init::kTruncNormal);
  b.Add("patch_embed.bias", {e}, Init::kZeros);
  b.Add("cls_token", {1, e}, Init::kTruncNormal);
  if (g.family == Family::kFlatViT) {
    b.Add("pos_embed", {grid * grid + 1, e}, Init::kTruncNormal);
  } else {
    b.Add("pos_embed", {e, grid, grid}, Init::kTruncNormal);
  }

  int stage = 0;
  for (int blk = 0; blk < g.depth; ++blk) {
    while (stage < g.StageOfBlock(blk)) {
      const int64_t w = g.StageWidth(stage);
      const std::string pre = "pools." + std::to_string(stage);
      b.Add(pre + ".conv.weight", {2 * w, 1, 3, 3}, Init::kTruncNormal);
      b.Add(pre + ".conv.bias", {2 * w}, Init::kZeros);
      b.AddLinear(pre + ".fc", 2 * w, w);
      ++stage;
    }
    const int64_t w = g.BlockWidth(blk);
    const int64_t hidden = g.MlpHidden(blk);
    const std::string pre = BlockPrefix(blk);
    b.AddNorm(pre + ".norm1", w);
    b.AddLinear(pre + ".attn.qkv", 3 * w, w);
    b.AddLinear(pre + ".attn.proj", w, w);
    b.AddNorm(pre + ".norm2", w);
    b.AddLinear(pre + ".mlp.fc1", hidden, w);
    b.AddLinear(pre + ".mlp.fc2", w, hidden);
  }
  // Stages with zero blocks at the tail still own their pooling layers.
  while (stage + 1 < g.num_stages()) {
    const int64_t w = g.StageWidth(stage);
    const std::string pre = "pools." + std::to_string(stage);
    b.Add(pre + ".conv.weight", {2 * w, 1, 3, 3}, Init::kTruncNormal);
    b.Add(pre + ".conv.bias", {2 * w}, Init::kZeros);
    b.AddLinear(pre + ".fc", 2 * w, w);
    ++stage;
  }
  const int64_t last = g.StageWidth(g.num_stages() - 1);
  b.AddNorm("norm", last);
  b.AddLinear("head", g.num_classes, last);
  return StudentModel{g, std::move(b.weights), seed};
}

Tensor StudentTokens(const StudentModel& m, const Tensor& batch, int block_index,
                     const AttentionObserver& observer) {
  const Genome& g = m.genome;
  CheckBatch(g, batch);
  if (block_index < 0) block_index = g.depth - 1;
  if (block_index < 0 || block_index >= g.depth) {
    throw Error(ErrorKind::kConfig, "student tap block " + std::to_string(block_index) +
                                        " outside [0, " + std::to_string(g.depth) + ")");
  }
  std::vector<Tensor> grids;
  grids.reserve(static_cast<size_t>(batch.dim(0)));
  for (int64_t i = 0; i < batch.dim(0); ++i) {
    Tensor x = RunBlocks(m, batch.Slice(i), block_index, observer);
    const int64_t l = x.dim(0) - 1;
    const int64_t p = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(l))));
    if (p * p != l) {
      throw Error(ErrorKind::kConfig,
                  "token count " + std::to_string(l) + " is not a perfect square");
    }
    grids.push_back(TokensToGrid(Rows(x, 1, l), p));
  }
  return Stack(grids);
}

Tensor StudentLogits(const StudentModel& m, const Tensor& batch) {
  const Genome& g = m.genome;
  CheckBatch(g, batch);
  std::vector<Tensor> logits;
  for (int64_t i = 0; i < batch.dim(0); ++i) {
    Tensor x = RunBlocks(m, batch.Slice(i), g.depth - 1, {});
    for (int s = g.depth > 0 ? g.StageOfBlock(g.depth - 1) : 0; s + 1 < g.num_stages(); ++s) {
      x = Pool(m, s, x);
    }
    Tensor cls = LayerNorm(Rows(x, 0, 1), m.weights.Get("norm.weight"),
                           m.weights.Get("norm.bias"), kLayerNormEps);
    logits.push_back(Linear(cls, m.weights.Get("head.weight"), &m.weights.Get("head.bias"))
                         .Reshape({g.num_classes}));
  }
  return Stack(logits);
}

}  // namespace tvt
