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
#include <functional>

#include "tvt/search_space.h"
#include "tvt/weight_map.h"

namespace tvt {

inline constexpr float kInitStd = 0.02f;
inline constexpr float kLayerNormEps = 1e-6f;

// Forward-executable student ViT. Pre-norm encoder blocks
// (x + MHSA(LN(x)), then x + MLP(LN(x)) with GELU), one class token.
//
// Tensor names:
//   patch_embed.{weight,bias}, cls_token, pos_embed,
//   blocks.<i>.norm1.{weight,bias}, blocks.<i>.attn.qkv.{weight,bias},
//   blocks.<i>.attn.proj.{weight,bias}, blocks.<i>.norm2.{weight,bias},
//   blocks.<i>.mlp.fc1.{weight,bias}, blocks.<i>.mlp.fc2.{weight,bias},
//   pools.<s>.conv.{weight,bias}, pools.<s>.fc.{weight,bias}   (hierarchical only)
//   norm.{weight,bias}, head.{weight,bias}
struct StudentModel {
  Genome genome;
  WeightMap weights;
  uint64_t init_seed = 0;
};

// Weights and class/position embeddings ~ trunc_normal(0, 0.02); biases 0;
// layernorm scale 1. Tensor k draws from Rng(seed).Child(k).
StudentModel BuildStudent(const Genome& g, uint64_t seed);

// Called with the [T x T] attention probabilities of every head.
using AttentionObserver = std::function<void(int block, int head, const Tensor& probs)>;

// Runs blocks 0..block_index on a [B x C x H x W] batch, drops the class
// token and returns the patch tokens as [B x C_i x P x P].
// block_index < 0 selects the last block.
Tensor StudentTokens(const StudentModel& m, const Tensor& batch, int block_index,
                     const AttentionObserver& observer = {});

// Full forward to class logits, [B x num_classes].
Tensor StudentLogits(const StudentModel& m, const Tensor& batch);

}  // namespace tvt
