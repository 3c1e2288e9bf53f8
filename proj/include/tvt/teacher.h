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
#include "tvt/weight_map.h"

namespace tvt {

enum class TeacherBlock {
  kBasic,  // ResNet basic block: conv-norm-ReLU-conv-norm + shortcut, ReLU
  kPlain,  // conv-norm-ReLU
};

// Stem conv followed by one block per stage. Stage 1 keeps the resolution,
// later stages downsample by 2. Norms are inference-time per-channel affines
// (scale, shift).
struct TeacherConfig {
  int in_channels = 3;
  int image_size = 32;
  int stem_channels = 16;
  int stem_kernel = 3;
  std::vector<int> stage_channels{16, 32, 64};
  int stage_kernel = 3;
  TeacherBlock block = TeacherBlock::kBasic;
  // "stem" or "stage<k>" (1-based). Empty selects the last stage.
  std::string tap_point;

  std::string ResolvedTap() const;
};

nlohmann::ordered_json TeacherConfigToJson(const TeacherConfig& cfg);
TeacherConfig TeacherConfigFromJson(const nlohmann::json& j);

struct TeacherModel {
  TeacherConfig config;
  WeightMap weights;
};

// Expected tensor names and shapes, in checkpoint order.
std::vector<std::pair<std::string, Shape>> TeacherLayout(const TeacherConfig& cfg);

// Conv weights ~ trunc_normal(0, sqrt(2 / fan_in)); norm scale 1, shift 0.
TeacherModel RandomTeacher(const TeacherConfig& cfg, uint64_t seed);

// Checkpoint directory: manifest.json plus one tensor file per weight.
void SaveTeacher(const std::filesystem::path& dir, const TeacherModel& t);
TeacherModel LoadTeacher(const std::filesystem::path& dir);

// [B x C x H x W] -> feature map at the tap point, [B x C_T x H_t x W_t].
Tensor TeacherFeatures(const TeacherModel& t, const Tensor& batch);

}  // namespace tvt
