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
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvt/rng.h"

namespace tvt {

enum class Family { kFlatViT, kHierarchicalViT };

const char* FamilyName(Family f);
Family ParseFamily(const std::string& name);

// One candidate ViT. Hierarchical genomes split `depth` blocks over
// `stage_depths`; stage s runs at width embed_dim * 2^s on a token grid halved
// by a strided depthwise pooling layer between stages.
struct Genome {
  std::string space_id;
  Family family = Family::kFlatViT;
  int image_size = 0;
  int in_channels = 3;
  int num_classes = 0;
  int patch_size = 0;
  int depth = 0;
  int embed_dim = 0;
  std::vector<int> heads;
  std::vector<double> mlp_ratio;
  std::vector<int> stage_depths;

  int num_stages() const {
    return family == Family::kHierarchicalViT ? static_cast<int>(stage_depths.size()) : 1;
  }
  int StageOfBlock(int block) const;
  int StageWidth(int stage) const { return embed_dim << stage; }
  int BlockWidth(int block) const { return StageWidth(StageOfBlock(block)); }
  int MlpHidden(int block) const;
  // Side length of the patch-token grid at `stage`.
  int StageGrid(int stage) const;

  bool operator==(const Genome&) const = default;
};

// Throws ErrorKind::kConfig naming the violated gene.
void ValidateGenome(const Genome& g);

// Canonical form: fixed key order, so the serialized text and its hash are stable.
nlohmann::ordered_json GenomeToJson(const Genome& g);
Genome GenomeFromJson(const nlohmann::json& j);
std::string CanonicalJson(const Genome& g);

uint64_t Fnv1a64(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ULL);
uint64_t GenomeHash(const Genome& g);
std::string HashHex(uint64_t h);
uint64_t ParseHashHex(const std::string& hex);

// Exact count of learnable scalars, derived from the architecture formulas
// (independently of any materialized model).
int64_t ParamCount(const Genome& g);

struct SearchSpaceSpec {
  std::string id;
  Family family = Family::kFlatViT;
  int image_size = 0;
  int in_channels = 3;
  int num_classes = 0;
  std::vector<int> patch_size;
  std::vector<int> depth;                     // flat family
  std::vector<std::vector<int>> stage_depths;  // hierarchical family: options per stage
  std::vector<int> embed_dim;
  std::vector<int> heads;
  std::vector<double> mlp_ratio;
  int64_t min_params = 0;
  int64_t max_params = 0;
};

void ValidateSpace(const SearchSpaceSpec& spec);
SearchSpaceSpec SpaceFromJson(const nlohmann::json& j);
nlohmann::ordered_json SpaceToJson(const SearchSpaceSpec& spec);
SearchSpaceSpec LoadSpace(const std::filesystem::path& path);

inline constexpr int kMaxSampleAttempts = 10000;

// Uniform per-gene draw, rejection-sampled into [min_params, max_params].
// Throws ErrorKind::kInfeasibleBudget after kMaxSampleAttempts rejections.
Genome SampleGenome(const SearchSpaceSpec& spec, Rng& rng);

// Genome i is drawn from rng.Child(i), so the population does not depend on
// evaluation order. Duplicates are kept.
std::vector<Genome> SamplePopulation(const SearchSpaceSpec& spec, int n, Rng& rng);

}  // namespace tvt
