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
#include <string>
#include <vector>

#include "tvt/proxy.h"
#include "tvt/search_space.h"
#include "tvt/teacher.h"

namespace tvt {

// Where the teacher comes from: a checkpoint directory, or a seeded random
// teacher of the given architecture.
struct TeacherSource {
  std::string checkpoint;
  TeacherConfig random_config;
  uint64_t random_seed = 0;
};

TeacherModel ResolveTeacher(const TeacherSource& src);
nlohmann::ordered_json TeacherSourceToJson(const TeacherSource& src);
TeacherSource TeacherSourceFromJson(const nlohmann::json& j);

struct SearchConfig {
  SearchSpaceSpec space;
  int population_size = 1000;
  int topk = 10;
  ProxyConfig proxy;
  TeacherSource teacher;
  uint64_t master_seed = 0;
  // Upper bound on scoring threads; 0 uses every core.
  int workers = 0;
};

// Raw metrics for candidate `index` built with init seed `seed`.
using CandidateScorer =
    std::function<RawMetrics(int64_t index, const Genome& g, uint64_t seed)>;

// TVT scorer over a fixed teacher and minibatch. Teacher features are
// computed once up front.
CandidateScorer MakeTvtScorer(const TeacherModel& teacher, const Tensor& batch,
                              const ProxyConfig& cfg);

// Init seed of candidate `index` for a run keyed by `seed`.
uint64_t CandidateSeed(uint64_t seed, int64_t index);

// Scores every genome in parallel (results keyed by index), then normalizes
// over the whole population. The first failing candidate (lowest index)
// aborts the call.
std::vector<ScoredCandidate> ScorePopulation(const std::vector<Genome>& genomes,
                                             const std::vector<uint64_t>& seeds,
                                             const CandidateScorer& scorer,
                                             const ProxyConfig& cfg, int workers);

// Descending tvt; ties go to the lower genome hash, then the lower index.
bool RanksBefore(const ScoredCandidate& a, const ScoredCandidate& b);

// k best of two lists that are each already ordered by RanksBefore.
std::vector<ScoredCandidate> TopkMerge(const std::vector<ScoredCandidate>& a,
                                       const std::vector<ScoredCandidate>& b, int k);

// The population run_search draws for `master_seed`.
std::vector<Genome> SampleSearchPopulation(const SearchSpaceSpec& spec, int n,
                                           uint64_t master_seed);

uint64_t PopulationDigest(const std::vector<Genome>& genomes);

struct SearchResult {
  ScoredCandidate best;
  std::vector<ScoredCandidate> topk;
  std::vector<ScoredCandidate> population;
  uint64_t population_digest = 0;
  double wall_time = 0.0;
};

// Samples population_size genomes, scores them, normalizes over the full
// population and returns the argmax plus the top-k.
SearchResult RunSearch(const SearchConfig& cfg);
// Same, with a caller-supplied scorer (e.g. injected metrics in tests).
SearchResult RunSearch(const SearchConfig& cfg, const CandidateScorer& scorer);

// Everything except wall_time, which lives in the run manifest.
nlohmann::ordered_json SearchResultToJson(const SearchResult& r);

}  // namespace tvt
