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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvt/search_space.h"
#include "tvt/student.h"
#include "tvt/teacher.h"

namespace tvt {

// Normalization applied to the channel-collapsed spatial map.
enum class Phi {
  kL2,       // divide by the L2 norm of the flattened map
  kL1,       // divide by the sum
  kSoftmax,  // softmax over the flattened map
};

const char* PhiName(Phi phi);
Phi ParsePhi(const std::string& name);

// How student weights are grouped before taking L2 norms.
enum class CapabilityGrouping {
  kPerBlock,   // one norm per encoder block, patch embedding, pooling layer, head
  kPerTensor,  // one norm per weight matrix / kernel
};

const char* GroupingName(CapabilityGrouping g);
CapabilityGrouping ParseGrouping(const std::string& name);

struct BatchSource {
  enum class Kind { kSynthetic, kFile };
  Kind kind = Kind::kSynthetic;
  int size = 16;
  uint64_t seed = 0;
  std::string path;
};

struct ProxyConfig {
  double alpha = 2.0;
  double beta = -3.0;
  BatchSource batch;
  // Student tap block; negative selects the last block.
  int student_block = -1;
  Phi phi = Phi::kL2;
  CapabilityGrouping grouping = CapabilityGrouping::kPerBlock;
};

nlohmann::ordered_json ProxyConfigToJson(const ProxyConfig& cfg);
ProxyConfig ProxyConfigFromJson(const nlohmann::json& j);

// Synthetic batches are standard normal, [size x channels x image x image].
Tensor MakeBatch(const BatchSource& src, int channels, int image_size);

enum class MapSource { kTeacher, kStudent };

struct AttentionMap {
  Tensor values;  // [P x P]
  MapSource source = MapSource::kStudent;
  Phi phi = Phi::kL2;
  // The channel sum of squares was identically zero; values are all zero.
  bool degenerate = false;
};

// phi(sum_c feat[c]^2) for a [C x P x P] feature.
AttentionMap ComputeAttentionMap(const Tensor& feat, Phi phi,
                                 MapSource source = MapSource::kStudent);

// L2 distance between two equally sized maps.
double MapDistance(const AttentionMap& a, const AttentionMap& b);

// Mean over the batch of || F(resize(T)) - F(S) ||_2. The teacher feature is
// bilinearly resized to the student's P x P grid before the map is formed.
double TeacherAwareMetric(const Tensor& teacher_feat, const Tensor& student_feat, Phi phi);

// Names of the weight tensors in each group, in model order.
std::vector<std::vector<std::string>> CapabilityGroups(const StudentModel& m,
                                                       CapabilityGrouping grouping);

// Sum over groups of the group's L2 norm. Biases, layernorm affines and the
// class/position embeddings are not part of any group.
double StudentCapabilityMetric(const StudentModel& m,
                               CapabilityGrouping grouping = CapabilityGrouping::kPerBlock);

struct Normalized {
  std::vector<double> values;
  bool degenerate = false;  // max == min; values are all zero
};

Normalized MinMaxNormalize(std::span<const double> values);

struct RawMetrics {
  double m_s = 0.0;
  double m_t = 0.0;
};

struct TvtScores {
  std::vector<double> f_m_s;
  std::vector<double> f_m_t;
  std::vector<double> tvt;
  bool degenerate_m_s = false;
  bool degenerate_m_t = false;
};

// alpha * f(m_s) + beta * f(m_t), with f min-max over exactly this population.
TvtScores ComputeTvtScores(std::span<const RawMetrics> metrics, const ProxyConfig& cfg);

// Builds the student with `seed` and computes both raw metrics on `batch`.
// Errors are rethrown with the genome hash prepended.
RawMetrics ScoreCandidate(const Genome& g, const TeacherModel& teacher, const Tensor& batch,
                          const ProxyConfig& cfg, uint64_t seed);
// Same, reusing teacher features already computed for `batch`.
RawMetrics ScoreCandidateWithFeatures(const Genome& g, const Tensor& teacher_feat,
                                      const Tensor& batch, const ProxyConfig& cfg, uint64_t seed);

struct ScoredCandidate {
  int64_t index = 0;
  Genome genome;
  uint64_t genome_hash = 0;
  double m_t = 0.0;
  double m_s = 0.0;
  double f_m_t = 0.0;
  double f_m_s = 0.0;
  double tvt = 0.0;
  int64_t params = 0;
  uint64_t seed = 0;
};

nlohmann::ordered_json ScoredToJson(const ScoredCandidate& c);
ScoredCandidate ScoredFromJson(const nlohmann::json& j);

}  // namespace tvt
