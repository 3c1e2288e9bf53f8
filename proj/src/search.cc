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

#include "tvt/search.h"

#include <algorithm>
#include <chrono>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tvt/error.h"
#include "tvt/log.h"

namespace tvt {

namespace {

// Independent streams under the master seed.
constexpr uint64_t kPopulationStream = 1;
constexpr uint64_t kInitStream = 2;

int ResolveWorkers(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_num_procs();
#else
  (void)workers;
  return 1;
#endif
}

}  // namespace

TeacherModel ResolveTeacher(const TeacherSource& src) {
  if (!src.checkpoint.empty()) return LoadTeacher(src.checkpoint);
  return RandomTeacher(src.random_config, src.random_seed);
}

nlohmann::ordered_json TeacherSourceToJson(const TeacherSource& src) {
  nlohmann::ordered_json j;
  if (!src.checkpoint.empty()) {
    j["checkpoint"] = src.checkpoint;
  } else {
    j["random"] = TeacherConfigToJson(src.random_config);
    j["seed"] = src.random_seed;
  }
  return j;
}

TeacherSource TeacherSourceFromJson(const nlohmann::json& j) {
  TeacherSource src;
  if (j.contains("checkpoint")) {
    src.checkpoint = j["checkpoint"].get<std::string>();
  } else {
    src.random_config = TeacherConfigFromJson(j.value("random", nlohmann::json::object()));
    src.random_seed = j.value("seed", uint64_t{0});
  }
  return src;
}

CandidateScorer MakeTvtScorer(const TeacherModel& teacher, const Tensor& batch,
                              const ProxyConfig& cfg) {
  auto features = std::make_shared<const Tensor>(TeacherFeatures(teacher, batch));
  auto input = std::make_shared<const Tensor>(batch);
  return [features, input, cfg](int64_t, const Genome& g, uint64_t seed) {
    return ScoreCandidateWithFeatures(g, *features, *input, cfg, seed);
  };
}

uint64_t CandidateSeed(uint64_t seed, int64_t index) {
  return DeriveSeed(DeriveSeed(seed, kInitStream), static_cast<uint64_t>(index));
}

std::vector<ScoredCandidate> ScorePopulation(const std::vector<Genome>& genomes,
                                             const std::vector<uint64_t>& seeds,
                                             const CandidateScorer& scorer,
                                             const ProxyConfig& cfg, int workers) {
  const int64_t n = static_cast<int64_t>(genomes.size());
  if (seeds.size() != genomes.size()) {
    throw Error(ErrorKind::kConfig, "one init seed per genome required");
  }
  std::vector<RawMetrics> raw(genomes.size());
  std::vector<std::exception_ptr> errors(genomes.size());
  bool failed = false;

#pragma omp parallel for schedule(dynamic, 1) num_threads(ResolveWorkers(workers))
  for (int64_t i = 0; i < n; ++i) {
    bool skip;
#pragma omp atomic read
    skip = failed;
    if (skip) continue;
    try {
      raw[i] = scorer(i, genomes[i], seeds[i]);
    } catch (...) {
      errors[i] = std::current_exception();
#pragma omp atomic write
      failed = true;
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const TvtScores scores = ComputeTvtScores(raw, cfg);
  std::vector<ScoredCandidate> out(genomes.size());
  for (int64_t i = 0; i < n; ++i) {
    ScoredCandidate& c = out[i];
    c.index = i;
    c.genome = genomes[i];
    c.genome_hash = GenomeHash(genomes[i]);
    c.m_s = raw[i].m_s;
    c.m_t = raw[i].m_t;
    c.f_m_s = scores.f_m_s[i];
    c.f_m_t = scores.f_m_t[i];
    c.tvt = scores.tvt[i];
    c.params = ParamCount(genomes[i]);
    c.seed = seeds[i];
  }
  return out;
}

bool RanksBefore(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.tvt != b.tvt) return a.tvt > b.tvt;
  if (a.genome_hash != b.genome_hash) return a.genome_hash < b.genome_hash;
  return a.index < b.index;
}

std::vector<ScoredCandidate> TopkMerge(const std::vector<ScoredCandidate>& a,
                                       const std::vector<ScoredCandidate>& b, int k) {
  std::vector<ScoredCandidate> out;
  const size_t limit = static_cast<size_t>(std::max(k, 0));
  out.reserve(std::min(limit, a.size() + b.size()));
  auto ia = a.begin(), ib = b.begin();
  while (out.size() < limit && (ia != a.end() || ib != b.end())) {
    if (ib == b.end() || (ia != a.end() && !RanksBefore(*ib, *ia))) {
      out.push_back(*ia++);
    } else {
      out.push_back(*ib++);
    }
  }
  return out;
}

std::vector<Genome> SampleSearchPopulation(const SearchSpaceSpec& spec, int n,
                                           uint64_t master_seed) {
  Rng rng(DeriveSeed(master_seed, kPopulationStream));
  return SamplePopulation(spec, n, rng);
}

uint64_t PopulationDigest(const std::vector<Genome>& genomes) {
  uint64_t h = Fnv1a64("");
  for (const Genome& g : genomes) h = Fnv1a64(HashHex(GenomeHash(g)), h);
  return h;
}

SearchResult RunSearch(const SearchConfig& cfg) {
  const TeacherModel teacher = ResolveTeacher(cfg.teacher);
  if (teacher.config.image_size != cfg.space.image_size ||
      teacher.config.in_channels != cfg.space.in_channels) {
    throw Error(ErrorKind::kConfig, "teacher input " + std::to_string(teacher.config.in_channels) +
                                        "x" + std::to_string(teacher.config.image_size) +
                                        " does not match search space " +
                                        std::to_string(cfg.space.in_channels) + "x" +
                                        std::to_string(cfg.space.image_size));
  }
  const Tensor batch = MakeBatch(cfg.proxy.batch, cfg.space.in_channels, cfg.space.image_size);
  return RunSearch(cfg, MakeTvtScorer(teacher, batch, cfg.proxy));
}

SearchResult RunSearch(const SearchConfig& cfg, const CandidateScorer& scorer) {
  if (cfg.population_size < 1 || cfg.topk < 1 || cfg.topk > cfg.population_size) {
    throw Error(ErrorKind::kConfig, "search needs 1 <= topk <= population_size, got topk " +
                                        std::to_string(cfg.topk) + ", population " +
                                        std::to_string(cfg.population_size));
  }
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Genome> genomes =
      SampleSearchPopulation(cfg.space, cfg.population_size, cfg.master_seed);
  std::vector<uint64_t> seeds(genomes.size());
  for (size_t i = 0; i < seeds.size(); ++i) {
    seeds[i] = CandidateSeed(cfg.master_seed, static_cast<int64_t>(i));
  }
  Log().info("scoring {} candidates from space '{}'", genomes.size(), cfg.space.id);

  SearchResult result;
  result.population = ScorePopulation(genomes, seeds, scorer, cfg.proxy, cfg.workers);
  for (const ScoredCandidate& c : result.population) {
    result.topk = TopkMerge(result.topk, {c}, cfg.topk);
  }
  result.best = result.topk.front();
  result.population_digest = PopulationDigest(genomes);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Log().info("best tvt {:.6f} (candidate {}), {:.2f}s", result.best.tvt, result.best.index,
             result.wall_time);
  return result;
}

nlohmann::ordered_json SearchResultToJson(const SearchResult& r) {
  nlohmann::ordered_json j;
  j["best"] = ScoredToJson(r.best);
  nlohmann::ordered_json topk = nlohmann::ordered_json::array();
  for (const auto& c : r.topk) topk.push_back(ScoredToJson(c));
  j["topk"] = topk;
  j["population_size"] = r.population.size();
  j["population_digest"] = HashHex(r.population_digest);
  return j;
}

}  // namespace tvt
