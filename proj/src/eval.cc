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

#include "tvt/eval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tvt/error.h"
#include "tvt/log.h"

namespace tvt {

namespace {

constexpr uint64_t kSampleStream = 1;
constexpr uint64_t kFixedSampleStream = 3;

// Pairs tied in `v` over a sorted range, grouped by equality under `same`.
template <typename It, typename Same>
int64_t TiedPairs(It first, It last, Same same) {
  int64_t pairs = 0;
  while (first != last) {
    It run = first;
    while (run != last && same(*run, *first)) ++run;
    const int64_t t = run - first;
    pairs += t * (t - 1) / 2;
    first = run;
  }
  return pairs;
}

// Stable merge sort of `v`; returns the number of strict inversions.
int64_t SortCountingInversions(std::vector<double>& v, std::vector<double>& scratch, size_t lo,
                               size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  int64_t swaps = SortCountingInversions(v, scratch, lo, mid) +
                  SortCountingInversions(v, scratch, mid, hi);
  size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double KendallTau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kDimension, "kendall_tau length mismatch: " +
                                           std::to_string(x.size()) + " vs " +
                                           std::to_string(y.size()));
  }
  const int64_t n = static_cast<int64_t>(x.size());
  if (n < 2) throw Error(ErrorKind::kDimension, "kendall_tau needs at least 2 points");

  std::vector<std::pair<double, double>> pts(x.size());
  for (size_t i = 0; i < x.size(); ++i) pts[i] = {x[i], y[i]};
  std::sort(pts.begin(), pts.end());

  const int64_t n0 = n * (n - 1) / 2;
  const int64_t tied_x =
      TiedPairs(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first == b.first; });
  const int64_t tied_xy = TiedPairs(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first == b.first && a.second == b.second;
  });

  std::vector<double> ys(x.size()), scratch(x.size());
  for (size_t i = 0; i < pts.size(); ++i) ys[i] = pts[i].second;
  const int64_t swaps = SortCountingInversions(ys, scratch, 0, ys.size());
  const int64_t tied_y = TiedPairs(ys.begin(), ys.end(), std::equal_to<>());

  const int64_t left = n0 - tied_x, right = n0 - tied_y;
  if (left == 0 || right == 0) {
    throw Error(ErrorKind::kDegenerate, "kendall_tau undefined for a constant input");
  }
  // concordant - discordant
  const int64_t score = n0 - tied_x - tied_y + tied_xy - 2 * swaps;
  return static_cast<double>(score) /
         std::sqrt(static_cast<double>(left) * static_cast<double>(right));
}

Oracle Oracle::FromTable(std::unordered_map<uint64_t, double> table) {
  Oracle o;
  o.kind_ = Kind::kFileTable;
  o.table_ = std::move(table);
  return o;
}

Oracle Oracle::Synthetic(Direction direction, double noise, uint64_t seed) {
  if (!(noise >= 0.0 && noise <= 1.0)) {
    throw Error(ErrorKind::kConfig, "oracle noise must be in [0, 1]");
  }
  Oracle o;
  o.kind_ = Kind::kSynthetic;
  o.direction_ = direction;
  o.noise_ = noise;
  o.seed_ = seed;
  return o;
}

std::vector<double> Oracle::Query(std::span<const ScoredCandidate> population, int run) const {
  std::vector<double> acc;
  acc.reserve(population.size());
  if (kind_ == Kind::kFileTable) {
    for (const ScoredCandidate& c : population) {
      auto it = table_.find(c.genome_hash);
      if (it == table_.end()) {
        throw Error(ErrorKind::kOracleMiss,
                    "accuracy table has no entry for genome " + HashHex(c.genome_hash));
      }
      acc.push_back(it->second);
    }
    return acc;
  }
  const Rng run_rng(DeriveSeed(seed_, static_cast<uint64_t>(run)));
  const double sign = direction_ == Direction::kIncreasing ? 1.0 : -1.0;
  for (size_t i = 0; i < population.size(); ++i) {
    Rng rng = run_rng.Child(i);
    // Both draws are always consumed so the stream does not depend on noise.
    const bool perturb = rng.NextDouble() < noise_;
    const double replacement = rng.Uniform(0.0, 100.0);
    acc.push_back(perturb ? replacement : 100.0 * Sigmoid(sign * population[i].tvt));
  }
  return acc;
}

nlohmann::ordered_json Oracle::Describe() const {
  nlohmann::ordered_json j;
  if (kind_ == Kind::kFileTable) {
    j["kind"] = "file_table";
    j["entries"] = table_.size();
  } else {
    j["kind"] = "synthetic";
    j["direction"] = direction_ == Direction::kIncreasing ? "increasing" : "decreasing";
    j["noise"] = noise_;
    j["seed"] = seed_;
  }
  return j;
}

ScoredRuns ScoreRuns(const SearchSpaceSpec& spec, const EvalConfig& cfg,
                     const ProxyConfig& proxy, const CandidateScorer& scorer) {
  if (cfg.n < 2 || cfg.runs < 1) {
    throw Error(ErrorKind::kConfig, "evaluation needs n >= 2 and runs >= 1");
  }
  ScoredRuns out;
  out.space_id = spec.id;
  for (int r = 0; r < cfg.runs; ++r) {
    const uint64_t run_seed = DeriveSeed(cfg.master_seed, static_cast<uint64_t>(r));
    Rng sample_rng(cfg.fixed_sample ? DeriveSeed(cfg.master_seed, ~kFixedSampleStream)
                                    : DeriveSeed(run_seed, kSampleStream));
    const std::vector<Genome> genomes = SamplePopulation(spec, cfg.n, sample_rng);
    std::vector<uint64_t> seeds(genomes.size());
    for (size_t i = 0; i < seeds.size(); ++i) {
      seeds[i] = CandidateSeed(run_seed, static_cast<int64_t>(i));
    }
    Log().info("eval run {}: scoring {} candidates", r, genomes.size());
    out.run_seeds.push_back(run_seed);
    out.populations.push_back(ScorePopulation(genomes, seeds, scorer, proxy, cfg.workers));
  }
  return out;
}

RankReport RankRuns(const ScoredRuns& runs, const Oracle& oracle, const std::string& dataset_tag,
                    std::vector<ScatterPoint>* scatter) {
  RankReport report;
  report.space_id = runs.space_id;
  report.dataset_tag = dataset_tag;
  for (size_t r = 0; r < runs.populations.size(); ++r) {
    const auto& pop = runs.populations[r];
    const std::vector<double> acc = oracle.Query(pop, static_cast<int>(r));
    std::vector<double> tvt(pop.size());
    for (size_t i = 0; i < pop.size(); ++i) tvt[i] = pop[i].tvt;
    const double tau = KendallTau(tvt, acc);
    report.per_run.push_back({tau, static_cast<int>(pop.size()), runs.run_seeds[r]});
    if (scatter) {
      for (size_t i = 0; i < pop.size(); ++i) {
        scatter->push_back({static_cast<int>(r), pop[i].genome_hash, tvt[i], acc[i]});
      }
    }
  }
  double total = 0.0;
  for (const RunTau& rt : report.per_run) total += rt.tau;
  report.mean_tau = total / static_cast<double>(report.per_run.size());
  return report;
}

RankReport EvaluateProxy(const SearchSpaceSpec& spec, const Oracle& oracle,
                         const EvalConfig& cfg, const ProxyConfig& proxy,
                         const CandidateScorer& scorer, std::vector<ScatterPoint>* scatter) {
  return RankRuns(ScoreRuns(spec, cfg, proxy, scorer), oracle, cfg.dataset_tag, scatter);
}

nlohmann::ordered_json ReportToJson(const RankReport& r) {
  nlohmann::ordered_json j;
  j["proxy_name"] = r.proxy_name;
  j["tau_variant"] = r.tau_variant;
  j["space_id"] = r.space_id;
  j["dataset_tag"] = r.dataset_tag;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const RunTau& rt : r.per_run) {
    runs.push_back({{"tau", rt.tau}, {"n", rt.n}, {"seed", rt.seed}});
  }
  j["per_run"] = runs;
  j["mean_tau"] = r.mean_tau;
  return j;
}

RankReport ReportFromJson(const nlohmann::json& j) {
  RankReport r;
  try {
    r.proxy_name = j.at("proxy_name").get<std::string>();
    r.tau_variant = j.at("tau_variant").get<std::string>();
    r.space_id = j.at("space_id").get<std::string>();
    r.dataset_tag = j.at("dataset_tag").get<std::string>();
    for (const auto& rt : j.at("per_run")) {
      r.per_run.push_back(
          {rt.at("tau").get<double>(), rt.at("n").get<int>(), rt.at("seed").get<uint64_t>()});
    }
    r.mean_tau = j.at("mean_tau").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed rank report: ") + e.what());
  }
  return r;
}

void ExportReport(const RankReport& r, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write report " + path.string());
  os << ReportToJson(r).dump(2) << '\n';
}

void ExportAccuracyTable(const std::unordered_map<uint64_t, double>& table,
                         const std::filesystem::path& path) {
  std::vector<std::pair<uint64_t, double>> rows(table.begin(), table.end());
  std::sort(rows.begin(), rows.end());
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write accuracy table " + path.string());
  os << "genome_hash,accuracy\n";
  for (const auto& [hash, acc] : rows) os << HashHex(hash) << ',' << FormatDouble(acc) << '\n';
}

Oracle ParseAccuracyTable(std::istream& is, const std::string& source) {
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::kParse, source + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
    return s;
  };
  ++lineno;
  if (!std::getline(is, line) || trim(line) != "genome_hash,accuracy") {
    fail("expected header 'genome_hash,accuracy'");
  }
  std::unordered_map<uint64_t, double> table;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      fail("expected two comma-separated fields");
    }
    const std::string hash_text = trim(line.substr(0, comma));
    const std::string acc_text = trim(line.substr(comma + 1));
    uint64_t hash = 0;
    try {
      hash = ParseHashHex(hash_text);
    } catch (const Error& e) {
      fail(e.what());
    }
    double acc = 0.0;
    auto res = std::from_chars(acc_text.data(), acc_text.data() + acc_text.size(), acc);
    if (res.ec != std::errc() || res.ptr != acc_text.data() + acc_text.size() ||
        !std::isfinite(acc) || acc < 0.0 || acc > 100.0) {
      fail("accuracy '" + acc_text + "' is not a number in [0, 100]");
    }
    if (!table.emplace(hash, acc).second) fail("duplicate genome hash " + hash_text);
  }
  return Oracle::FromTable(std::move(table));
}

Oracle ImportAccuracyTable(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open accuracy table " + path.string());
  return ParseAccuracyTable(is, path.string());
}

}  // namespace tvt
