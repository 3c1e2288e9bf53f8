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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tvt/search.h"

namespace tvt {

// Kendall tau-b (tie-corrected), O(n log n) via merge-sort inversion counting.
// Throws kDimension on length mismatch or n < 2, kDegenerate when either
// argument is constant.
double KendallTau(std::span<const double> x, std::span<const double> y);

// Accuracy source for rank-consistency evaluation.
//  - file table: genome hash -> accuracy in [0, 100] from trained runs;
//  - synthetic: 100 * sigmoid(+/- tvt) of the candidate's own score. With
//    probability `noise` a candidate's accuracy is instead drawn uniformly
//    from [0, 100) (rank perturbation), keyed by (seed, run, position).
class Oracle {
 public:
  enum class Kind { kFileTable, kSynthetic };
  enum class Direction { kIncreasing, kDecreasing };

  static Oracle FromTable(std::unordered_map<uint64_t, double> table);
  static Oracle Synthetic(Direction direction, double noise, uint64_t seed);

  Kind kind() const { return kind_; }
  const std::unordered_map<uint64_t, double>& table() const { return table_; }

  // One accuracy per candidate. Throws kOracleMiss naming the genome hash.
  std::vector<double> Query(std::span<const ScoredCandidate> population, int run) const;

  nlohmann::ordered_json Describe() const;

 private:
  Kind kind_ = Kind::kSynthetic;
  std::unordered_map<uint64_t, double> table_;
  Direction direction_ = Direction::kIncreasing;
  double noise_ = 0.0;
  uint64_t seed_ = 0;
};

struct RunTau {
  double tau = 0.0;
  int n = 0;
  uint64_t seed = 0;
};

struct RankReport {
  std::vector<RunTau> per_run;
  double mean_tau = 0.0;
  std::string proxy_name = "tvt";
  std::string tau_variant = "tau-b";
  std::string space_id;
  std::string dataset_tag;
};

struct ScatterPoint {
  int run = 0;
  uint64_t genome_hash = 0;
  double tvt = 0.0;
  double accuracy = 0.0;
};

struct EvalConfig {
  int n = 100;
  int runs = 3;
  // Reuse one genome sample for every run; only weight init changes.
  bool fixed_sample = false;
  uint64_t master_seed = 0;
  int workers = 0;
  std::string dataset_tag = "synthetic";
};

// Scored populations of each run, before any oracle is consulted.
struct ScoredRuns {
  std::string space_id;
  std::vector<uint64_t> run_seeds;
  std::vector<std::vector<ScoredCandidate>> populations;
};

ScoredRuns ScoreRuns(const SearchSpaceSpec& spec, const EvalConfig& cfg,
                     const ProxyConfig& proxy, const CandidateScorer& scorer);

RankReport RankRuns(const ScoredRuns& runs, const Oracle& oracle, const std::string& dataset_tag,
                    std::vector<ScatterPoint>* scatter = nullptr);

// ScoreRuns followed by RankRuns.
RankReport EvaluateProxy(const SearchSpaceSpec& spec, const Oracle& oracle,
                         const EvalConfig& cfg, const ProxyConfig& proxy,
                         const CandidateScorer& scorer,
                         std::vector<ScatterPoint>* scatter = nullptr);

nlohmann::ordered_json ReportToJson(const RankReport& r);
RankReport ReportFromJson(const nlohmann::json& j);
void ExportReport(const RankReport& r, const std::filesystem::path& path);

// CSV with header "genome_hash,accuracy".
void ExportAccuracyTable(const std::unordered_map<uint64_t, double>& table,
                         const std::filesystem::path& path);
Oracle ImportAccuracyTable(const std::filesystem::path& path);
Oracle ParseAccuracyTable(std::istream& is, const std::string& source);

}  // namespace tvt
