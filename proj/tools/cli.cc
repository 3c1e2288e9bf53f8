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

#include "cli.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvt/error.h"
#include "tvt/eval.h"
#include "tvt/kernels.h"
#include "tvt/log.h"
#include "tvt/search.h"

#ifndef TVT_VERSION
#define TVT_VERSION "unknown"
#endif

namespace tvt::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct CommonFlags {
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir;
  std::string config;
  std::string space;
  bool dry_run = false;
};

struct ConfigFile {
  json j = json::object();
  fs::path base;  // relative paths in the file resolve against this
};

std::string Timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ConfigFile LoadConfig(const std::string& path) {
  ConfigFile cfg;
  if (path.empty()) return cfg;
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kConfig, "cannot open config " + path);
  try {
    cfg.j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, "config " + path + ": " + e.what());
  }
  if (!cfg.j.is_object()) throw Error(ErrorKind::kConfig, "config " + path + " is not an object");
  cfg.base = fs::path(path).parent_path();
  return cfg;
}

std::string ResolvePath(const fs::path& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal().string();
}

template <typename T>
T Field(const ConfigFile& cfg, const char* key, T fallback) {
  try {
    return cfg.j.value(key, fallback);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config field '") + key + "': " + e.what());
  }
}

json Section(const ConfigFile& cfg, const char* key) {
  if (!cfg.j.contains(key)) return json::object();
  if (!cfg.j[key].is_object()) {
    throw Error(ErrorKind::kConfig, std::string("config field '") + key + "' must be an object");
  }
  return cfg.j[key];
}

template <typename T>
T SectionField(const json& section, const char* name, const char* key, T fallback) {
  try {
    return section.value(key, fallback);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig,
                std::string("config field '") + name + "." + key + "': " + e.what());
  }
}

uint64_t ResolveSeed(const CommonFlags& f, const ConfigFile& cfg) {
  return f.seed ? *f.seed : Field<uint64_t>(cfg, "seed", 0);
}

int ResolveWorkers(const CommonFlags& f, const ConfigFile& cfg) {
  const int w = f.workers ? *f.workers : Field<int>(cfg, "workers", 0);
  if (w < 0) throw Error(ErrorKind::kConfig, "workers must be >= 0");
  return w;
}

fs::path ResolveOutDir(const CommonFlags& f, const ConfigFile& cfg) {
  if (!f.out_dir.empty()) return f.out_dir;
  const std::string dir = Field<std::string>(cfg, "out_dir", "");
  return dir.empty() ? fs::path(".") : fs::path(ResolvePath(cfg.base, dir));
}

SearchSpaceSpec ResolveSpace(const CommonFlags& f, const ConfigFile& cfg) {
  if (!f.space.empty()) return LoadSpace(f.space);
  if (!cfg.j.contains("space")) {
    throw Error(ErrorKind::kConfig, "no search space given (--space or config field 'space')");
  }
  const json& s = cfg.j["space"];
  if (s.is_string()) return LoadSpace(ResolvePath(cfg.base, s.get<std::string>()));
  return SpaceFromJson(s);
}

ProxyConfig ResolveProxy(const ConfigFile& cfg, const std::string& batch_flag) {
  ProxyConfig p = ProxyConfigFromJson(Section(cfg, "proxy"));
  if (!batch_flag.empty()) {
    p.batch.kind = BatchSource::Kind::kFile;
    p.batch.path = batch_flag;
  } else if (p.batch.kind == BatchSource::Kind::kFile) {
    p.batch.path = ResolvePath(cfg.base, p.batch.path);
  }
  return p;
}

// Random teachers default to the input geometry of the candidates.
TeacherSource ResolveTeacherSource(const ConfigFile& cfg, const std::string& teacher_flag,
                                   int in_channels, int image_size) {
  if (!teacher_flag.empty()) {
    TeacherSource src;
    src.checkpoint = teacher_flag;
    return src;
  }
  json t = Section(cfg, "teacher");
  if (t.contains("checkpoint")) {
    t["checkpoint"] = ResolvePath(cfg.base, t["checkpoint"].get<std::string>());
  } else {
    json random = t.value("random", json::object());
    if (!random.contains("in_channels")) random["in_channels"] = in_channels;
    if (!random.contains("image_size")) random["image_size"] = image_size;
    t["random"] = random;
  }
  return TeacherSourceFromJson(t);
}

void CheckTeacherInput(const TeacherModel& teacher, int in_channels, int image_size) {
  if (teacher.config.in_channels != in_channels || teacher.config.image_size != image_size) {
    throw Error(ErrorKind::kConfig,
                "teacher input " + std::to_string(teacher.config.in_channels) + "x" +
                    std::to_string(teacher.config.image_size) + " does not match candidates " +
                    std::to_string(in_channels) + "x" + std::to_string(image_size));
  }
}

void ApplyWorkers(int workers) {
  if (workers > 0) SetNumThreads(workers);
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + dir.string());
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::string Jsonl(const std::vector<ScoredCandidate>& pop) {
  std::string out;
  for (const auto& c : pop) out += ScoredToJson(c).dump() + '\n';
  return out;
}

class Manifest {
 public:
  Manifest(std::string command, ojson config, uint64_t seed)
      : command_(std::move(command)), config_(std::move(config)), seed_(seed),
        started_(Timestamp()), start_(std::chrono::steady_clock::now()) {}

  void AddOutput(const fs::path& path) { outputs_.push_back(path.string()); }

  void Write(const fs::path& path, const ojson& extra = ojson::object()) const {
    ojson j;
    j["command"] = command_;
    j["toolkit_version"] = TVT_VERSION;
    j["master_seed"] = seed_;
    j["config"] = config_;
    j["started_at"] = started_;
    j["finished_at"] = Timestamp();
    j["wall_time"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    for (const auto& [k, v] : extra.items()) j[k] = v;
    j["outputs"] = outputs_;
    WriteText(path, j.dump(2) + '\n');
  }

 private:
  std::string command_;
  ojson config_;
  uint64_t seed_;
  std::string started_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

void PrintJson(const ojson& j) { std::cout << j.dump() << std::endl; }

// ---------------------------------------------------------------- sample

struct SampleFlags {
  std::optional<int> n;
  std::string out;
};

int CmdSample(const CommonFlags& f, const SampleFlags& s) {
  const ConfigFile cfg = LoadConfig(f.config);
  const SearchSpaceSpec spec = ResolveSpace(f, cfg);
  const uint64_t seed = ResolveSeed(f, cfg);
  const int n = s.n ? *s.n : Field<int>(cfg, "population_size", 1000);
  if (n < 1) throw Error(ErrorKind::kConfig, "--n must be >= 1");

  ojson snapshot;
  snapshot["space"] = SpaceToJson(spec);
  snapshot["n"] = n;
  snapshot["seed"] = seed;
  if (f.dry_run) {
    PrintJson({{"dry_run", true}, {"config", snapshot}});
    return kExitOk;
  }

  Manifest manifest("sample", snapshot, seed);
  const fs::path out_dir = !f.out_dir.empty() || s.out.empty() ? ResolveOutDir(f, cfg)
                                                              : fs::path(s.out).parent_path();
  const fs::path out = s.out.empty() ? out_dir / "genomes.jsonl" : fs::path(s.out);
  if (!out_dir.empty()) EnsureDir(out_dir);

  const std::vector<Genome> genomes = SampleSearchPopulation(spec, n, seed);
  std::string text;
  std::vector<int64_t> params;
  for (size_t i = 0; i < genomes.size(); ++i) {
    ojson line;
    line["index"] = i;
    line["genome_hash"] = HashHex(GenomeHash(genomes[i]));
    line["params"] = ParamCount(genomes[i]);
    line["genome"] = GenomeToJson(genomes[i]);
    text += line.dump() + '\n';
    params.push_back(ParamCount(genomes[i]));
  }
  WriteText(out, text);
  manifest.AddOutput(out);

  std::sort(params.begin(), params.end());
  double mean = 0.0;
  for (int64_t p : params) mean += static_cast<double>(p);
  mean /= static_cast<double>(params.size());
  ojson stats{{"n", n},
              {"params_min", params.front()},
              {"params_median", params[params.size() / 2]},
              {"params_mean", mean},
              {"params_max", params.back()}};
  manifest.Write((out_dir.empty() ? fs::path(".") : out_dir) / "manifest.json",
                 {{"summary", stats}});
  PrintJson(stats);
  return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreFlags {
  std::string genomes;
  std::string teacher;
  std::string batch;
  std::string out;
  bool use_raw_metrics = false;
};

struct GenomeLine {
  Genome genome;
  std::optional<RawMetrics> raw;
};

std::vector<GenomeLine> ReadGenomeFile(const std::string& path, bool want_raw) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open genome file " + path);
  std::vector<GenomeLine> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      GenomeLine g;
      g.genome = GenomeFromJson(j.contains("genome") ? j["genome"] : j);
      ValidateGenome(g.genome);
      if (want_raw) g.raw = RawMetrics{j.at("m_s").get<double>(), j.at("m_t").get<double>()};
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorKind::kParse, path + ": no genomes");
  return out;
}

int CmdScore(const CommonFlags& f, const ScoreFlags& s) {
  const ConfigFile cfg = LoadConfig(f.config);
  const std::string genomes_path =
      !s.genomes.empty() ? s.genomes : ResolvePath(cfg.base, Field<std::string>(cfg, "genomes", ""));
  if (genomes_path.empty()) {
    throw Error(ErrorKind::kConfig, "no genome file given (--genomes or config field 'genomes')");
  }
  const uint64_t seed = ResolveSeed(f, cfg);
  const int workers = ResolveWorkers(f, cfg);
  const ProxyConfig proxy = ResolveProxy(cfg, s.batch);
  const std::vector<GenomeLine> lines = ReadGenomeFile(genomes_path, s.use_raw_metrics);
  const int in_channels = lines.front().genome.in_channels;
  const int image_size = lines.front().genome.image_size;
  for (const auto& l : lines) {
    if (l.genome.in_channels != in_channels || l.genome.image_size != image_size) {
      throw Error(ErrorKind::kConfig, "genomes in " + genomes_path + " mix input geometries");
    }
  }
  const TeacherSource teacher_src = ResolveTeacherSource(cfg, s.teacher, in_channels, image_size);

  ojson snapshot;
  snapshot["genomes"] = genomes_path;
  snapshot["seed"] = seed;
  snapshot["workers"] = workers;
  snapshot["use_raw_metrics"] = s.use_raw_metrics;
  snapshot["proxy"] = ProxyConfigToJson(proxy);
  if (!s.use_raw_metrics) snapshot["teacher"] = TeacherSourceToJson(teacher_src);

  ApplyWorkers(workers);
  CandidateScorer scorer;
  if (s.use_raw_metrics) {
    scorer = [&lines](int64_t i, const Genome&, uint64_t) { return *lines[i].raw; };
  } else {
    const TeacherModel teacher = ResolveTeacher(teacher_src);
    CheckTeacherInput(teacher, in_channels, image_size);
    const Tensor batch = MakeBatch(proxy.batch, in_channels, image_size);
    scorer = MakeTvtScorer(teacher, batch, proxy);
  }
  if (f.dry_run) {
    PrintJson({{"dry_run", true}, {"config", snapshot}});
    return kExitOk;
  }

  Manifest manifest("score", snapshot, seed);
  const fs::path out_dir = ResolveOutDir(f, cfg);
  EnsureDir(out_dir);
  const fs::path out = s.out.empty() ? out_dir / "scored.jsonl" : fs::path(s.out);

  std::vector<Genome> genomes;
  std::vector<uint64_t> seeds;
  for (size_t i = 0; i < lines.size(); ++i) {
    genomes.push_back(lines[i].genome);
    seeds.push_back(CandidateSeed(seed, static_cast<int64_t>(i)));
  }
  const std::vector<ScoredCandidate> scored =
      ScorePopulation(genomes, seeds, scorer, proxy, workers);
  WriteText(out, Jsonl(scored));
  manifest.AddOutput(out);
  manifest.Write(out_dir / "manifest.json");
  PrintJson({{"scored", scored.size()}, {"out", out.string()}});
  return kExitOk;
}

// ---------------------------------------------------------------- search

struct SearchFlags {
  std::optional<int> population;
  std::optional<int> topk;
};

int CmdSearch(const CommonFlags& f, const SearchFlags& s) {
  const ConfigFile cfg = LoadConfig(f.config);
  SearchConfig sc;
  sc.space = ResolveSpace(f, cfg);
  sc.population_size = s.population ? *s.population : Field<int>(cfg, "population_size", 1000);
  sc.topk = s.topk ? *s.topk : Field<int>(cfg, "topk", 10);
  sc.proxy = ResolveProxy(cfg, "");
  sc.teacher = ResolveTeacherSource(cfg, "", sc.space.in_channels, sc.space.image_size);
  sc.master_seed = ResolveSeed(f, cfg);
  sc.workers = ResolveWorkers(f, cfg);
  if (sc.population_size < 1 || sc.topk < 1 || sc.topk > sc.population_size) {
    throw Error(ErrorKind::kConfig, "search needs 1 <= topk <= population_size");
  }

  ojson snapshot;
  snapshot["space"] = SpaceToJson(sc.space);
  snapshot["population_size"] = sc.population_size;
  snapshot["topk"] = sc.topk;
  snapshot["seed"] = sc.master_seed;
  snapshot["workers"] = sc.workers;
  snapshot["proxy"] = ProxyConfigToJson(sc.proxy);
  snapshot["teacher"] = TeacherSourceToJson(sc.teacher);

  ApplyWorkers(sc.workers);
  const TeacherModel teacher = ResolveTeacher(sc.teacher);
  CheckTeacherInput(teacher, sc.space.in_channels, sc.space.image_size);
  const Tensor batch = MakeBatch(sc.proxy.batch, sc.space.in_channels, sc.space.image_size);
  if (f.dry_run) {
    PrintJson({{"dry_run", true}, {"config", snapshot}});
    return kExitOk;
  }

  Manifest manifest("search", snapshot, sc.master_seed);
  const fs::path out_dir = ResolveOutDir(f, cfg);
  EnsureDir(out_dir);
  const SearchResult r = RunSearch(sc, MakeTvtScorer(teacher, batch, sc.proxy));

  ojson topk = ojson::array();
  for (const auto& c : r.topk) topk.push_back(ScoredToJson(c));
  const std::vector<std::pair<fs::path, std::string>> files{
      {out_dir / "result.json", SearchResultToJson(r).dump(2) + '\n'},
      {out_dir / "best.json", ScoredToJson(r.best).dump(2) + '\n'},
      {out_dir / "topk.json", topk.dump(2) + '\n'},
      {out_dir / "population.jsonl", Jsonl(r.population)},
  };
  for (const auto& [path, text] : files) {
    WriteText(path, text);
    manifest.AddOutput(path);
  }
  manifest.Write(out_dir / "manifest.json", {{"search_wall_time", r.wall_time}});
  PrintJson({{"best_index", r.best.index},
             {"best_genome_hash", HashHex(r.best.genome_hash)},
             {"best_tvt", r.best.tvt},
             {"wall_time", r.wall_time}});
  return kExitOk;
}

// ---------------------------------------------------------------- eval-rank

struct EvalFlags {
  std::optional<int> n;
  std::optional<int> runs;
};

Oracle ResolveOracle(const ConfigFile& cfg, uint64_t seed, ojson& snapshot) {
  const json o = Section(cfg, "oracle");
  const std::string kind = SectionField<std::string>(o, "oracle", "kind", "synthetic");
  if (kind == "file_table") {
    const std::string path =
        ResolvePath(cfg.base, SectionField<std::string>(o, "oracle", "path", ""));
    if (path.empty()) throw Error(ErrorKind::kConfig, "oracle.path is required for file_table");
    snapshot = {{"kind", kind}, {"path", path}};
    return ImportAccuracyTable(path);
  }
  if (kind != "synthetic") throw Error(ErrorKind::kConfig, "unknown oracle kind '" + kind + "'");
  const std::string dir = SectionField<std::string>(o, "oracle", "direction", "increasing");
  Oracle::Direction direction;
  if (dir == "increasing") {
    direction = Oracle::Direction::kIncreasing;
  } else if (dir == "decreasing") {
    direction = Oracle::Direction::kDecreasing;
  } else {
    throw Error(ErrorKind::kConfig, "unknown oracle direction '" + dir + "'");
  }
  Oracle oracle = Oracle::Synthetic(direction, SectionField<double>(o, "oracle", "noise", 0.0),
                                    SectionField<uint64_t>(o, "oracle", "seed", seed));
  snapshot = oracle.Describe();
  return oracle;
}

int CmdEvalRank(const CommonFlags& f, const EvalFlags& e) {
  const ConfigFile cfg = LoadConfig(f.config);
  const SearchSpaceSpec spec = ResolveSpace(f, cfg);
  const json ev = Section(cfg, "eval");
  EvalConfig ec;
  ec.n = e.n ? *e.n : SectionField<int>(ev, "eval", "n", ec.n);
  ec.runs = e.runs ? *e.runs : SectionField<int>(ev, "eval", "runs", ec.runs);
  ec.fixed_sample = SectionField<bool>(ev, "eval", "fixed_sample", ec.fixed_sample);
  ec.dataset_tag = SectionField<std::string>(ev, "eval", "dataset_tag", ec.dataset_tag);
  const bool scatter = SectionField<bool>(ev, "eval", "scatter", true);
  ec.master_seed = ResolveSeed(f, cfg);
  ec.workers = ResolveWorkers(f, cfg);
  if (ec.n < 2 || ec.runs < 1) throw Error(ErrorKind::kConfig, "eval needs n >= 2 and runs >= 1");
  const ProxyConfig proxy = ResolveProxy(cfg, "");
  const TeacherSource teacher_src =
      ResolveTeacherSource(cfg, "", spec.in_channels, spec.image_size);

  ojson oracle_snapshot;
  const Oracle oracle = ResolveOracle(cfg, ec.master_seed, oracle_snapshot);
  ojson snapshot;
  snapshot["space"] = SpaceToJson(spec);
  snapshot["n"] = ec.n;
  snapshot["runs"] = ec.runs;
  snapshot["fixed_sample"] = ec.fixed_sample;
  snapshot["dataset_tag"] = ec.dataset_tag;
  snapshot["seed"] = ec.master_seed;
  snapshot["workers"] = ec.workers;
  snapshot["proxy"] = ProxyConfigToJson(proxy);
  snapshot["teacher"] = TeacherSourceToJson(teacher_src);
  snapshot["oracle"] = oracle_snapshot;

  ApplyWorkers(ec.workers);
  const TeacherModel teacher = ResolveTeacher(teacher_src);
  CheckTeacherInput(teacher, spec.in_channels, spec.image_size);
  const Tensor batch = MakeBatch(proxy.batch, spec.in_channels, spec.image_size);
  if (f.dry_run) {
    PrintJson({{"dry_run", true}, {"config", snapshot}});
    return kExitOk;
  }

  Manifest manifest("eval-rank", snapshot, ec.master_seed);
  const fs::path out_dir = ResolveOutDir(f, cfg);
  EnsureDir(out_dir);
  std::vector<ScatterPoint> points;
  const RankReport report = EvaluateProxy(spec, oracle, ec, proxy,
                                          MakeTvtScorer(teacher, batch, proxy), &points);
  const fs::path report_path = out_dir / "report.json";
  ExportReport(report, report_path);
  manifest.AddOutput(report_path);
  if (scatter) {
    std::string text = "run,genome_hash,tvt,accuracy\n";
    for (const auto& p : points) {
      text += std::to_string(p.run) + ',' + HashHex(p.genome_hash) + ',' + FormatDouble(p.tvt) +
              ',' + FormatDouble(p.accuracy) + '\n';
    }
    WriteText(out_dir / "scatter.csv", text);
    manifest.AddOutput(out_dir / "scatter.csv");
  }
  manifest.Write(out_dir / "manifest.json");
  PrintJson({{"mean_tau", report.mean_tau}, {"runs", report.per_run.size()}});
  return kExitOk;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kParse:
    case ErrorKind::kInfeasibleBudget:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

int ReportError(const std::string& kind, const std::string& message, int code) {
  ojson j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << std::endl;
  return code;
}

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--workers", f.workers, "Scoring thread bound (0 = all cores)");
  cmd->add_option("--out-dir", f.out_dir, "Output directory");
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--space", f.space, "Search space JSON file");
  cmd->add_flag("--dry-run", f.dry_run, "Validate inputs and exit without running");
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"Teacher-aware zero-cost proxy search for vision transformers", "tvt"};
  app.set_version_flag("--version", TVT_VERSION);
  app.require_subcommand(1);

  CommonFlags common;
  SampleFlags sample;
  ScoreFlags score;
  SearchFlags search;
  EvalFlags eval;

  CLI::App* sample_cmd = app.add_subcommand("sample", "Sample genomes into a JSON Lines file");
  AddCommon(sample_cmd, common);
  sample_cmd->add_option("--n", sample.n, "Number of genomes");
  sample_cmd->add_option("--out", sample.out, "Output file (default <out-dir>/genomes.jsonl)");

  CLI::App* score_cmd = app.add_subcommand("score", "Score a genome file");
  AddCommon(score_cmd, common);
  score_cmd->add_option("--genomes", score.genomes, "Input JSON Lines genome file");
  score_cmd->add_option("--teacher", score.teacher, "Teacher checkpoint directory");
  score_cmd->add_option("--batch", score.batch, "Minibatch tensor file");
  score_cmd->add_option("--out", score.out, "Output file (default <out-dir>/scored.jsonl)");
  score_cmd->add_flag("--use-raw-metrics", score.use_raw_metrics,
                      "Take m_s and m_t from the input lines instead of computing them");

  CLI::App* search_cmd = app.add_subcommand("search", "Run the top-k proxy search");
  AddCommon(search_cmd, common);
  search_cmd->add_option("--population", search.population, "Population size");
  search_cmd->add_option("--topk", search.topk, "Number of candidates kept");

  CLI::App* eval_cmd = app.add_subcommand("eval-rank", "Kendall rank-consistency evaluation");
  AddCommon(eval_cmd, common);
  eval_cmd->add_option("--n", eval.n, "Candidates per run");
  eval_cmd->add_option("--runs", eval.runs, "Number of runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError("usage", e.what(), kExitConfig);
  }

  try {
    Log();
    if (*sample_cmd) return CmdSample(common, sample);
    if (*score_cmd) return CmdScore(common, score);
    if (*search_cmd) return CmdSearch(common, search);
    return CmdEvalRank(common, eval);
  } catch (const Error& e) {
    return ReportError(ErrorKindName(e.kind()), e.what(), ExitCodeFor(e.kind()));
  } catch (const std::exception& e) {
    return ReportError("internal", e.what(), kExitRuntime);
  }
}

}  // namespace tvt::cli
