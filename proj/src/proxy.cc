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

#include "tvt/proxy.h"

#include <algorithm>
#include <cmath>

#include "tvt/error.h"
#include "tvt/kernels.h"
#include "tvt/log.h"
#include "tvt/tensor_io.h"

namespace tvt {

const char* PhiName(Phi phi) {
  switch (phi) {
    case Phi::kL2: return "l2";
    case Phi::kL1: return "l1";
    case Phi::kSoftmax: return "softmax";
  }
  return "l2";
}

Phi ParsePhi(const std::string& name) {
  if (name == "l2") return Phi::kL2;
  if (name == "l1") return Phi::kL1;
  if (name == "softmax") return Phi::kSoftmax;
  throw Error(ErrorKind::kConfig, "unknown phi '" + name + "' (expected l2, l1 or softmax)");
}

const char* GroupingName(CapabilityGrouping g) {
  return g == CapabilityGrouping::kPerBlock ? "per_block" : "per_tensor";
}

CapabilityGrouping ParseGrouping(const std::string& name) {
  if (name == "per_block") return CapabilityGrouping::kPerBlock;
  if (name == "per_tensor") return CapabilityGrouping::kPerTensor;
  throw Error(ErrorKind::kConfig, "unknown grouping '" + name + "'");
}

nlohmann::ordered_json ProxyConfigToJson(const ProxyConfig& cfg) {
  nlohmann::ordered_json batch;
  if (cfg.batch.kind == BatchSource::Kind::kSynthetic) {
    batch["source"] = "synthetic";
    batch["size"] = cfg.batch.size;
    batch["seed"] = cfg.batch.seed;
  } else {
    batch["source"] = "file";
    batch["path"] = cfg.batch.path;
  }
  nlohmann::ordered_json j;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["phi"] = PhiName(cfg.phi);
  j["student_block"] = cfg.student_block;
  j["grouping"] = GroupingName(cfg.grouping);
  j["batch"] = batch;
  return j;
}

ProxyConfig ProxyConfigFromJson(const nlohmann::json& j) {
  ProxyConfig cfg;
  try {
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.phi = ParsePhi(j.value("phi", std::string("l2")));
    cfg.student_block = j.value("student_block", cfg.student_block);
    cfg.grouping = ParseGrouping(j.value("grouping", std::string("per_block")));
    if (j.contains("batch")) {
      const auto& b = j["batch"];
      const std::string source = b.value("source", std::string("synthetic"));
      if (source == "synthetic") {
        cfg.batch.kind = BatchSource::Kind::kSynthetic;
        cfg.batch.size = b.value("size", cfg.batch.size);
        cfg.batch.seed = b.value("seed", cfg.batch.seed);
      } else if (source == "file") {
        cfg.batch.kind = BatchSource::Kind::kFile;
        cfg.batch.path = b.at("path").get<std::string>();
      } else {
        throw Error(ErrorKind::kConfig, "unknown batch source '" + source + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed proxy config: ") + e.what());
  }
  if (!std::isfinite(cfg.alpha) || !std::isfinite(cfg.beta)) {
    throw Error(ErrorKind::kConfig, "proxy alpha and beta must be finite");
  }
  if (cfg.batch.kind == BatchSource::Kind::kSynthetic && cfg.batch.size < 1) {
    throw Error(ErrorKind::kConfig, "batch size must be >= 1");
  }
  return cfg;
}

Tensor MakeBatch(const BatchSource& src, int channels, int image_size) {
  if (src.kind == BatchSource::Kind::kFile) {
    Tensor t = LoadTensor(src.path);
    if (t.rank() != 4 || t.dim(1) != channels || t.dim(2) != image_size ||
        t.dim(3) != image_size) {
      throw Error(ErrorKind::kDimension, "batch file " + src.path + " has shape " +
                                             ShapeString(t.shape()) + ", expected [B x " +
                                             std::to_string(channels) + " x " +
                                             std::to_string(image_size) + " x " +
                                             std::to_string(image_size) + "]");
    }
    return t;
  }
  Rng rng(src.seed);
  Tensor t({src.size, channels, image_size, image_size});
  for (float& v : t.mutable_data()) v = static_cast<float>(rng.Normal());
  return t;
}

AttentionMap ComputeAttentionMap(const Tensor& feat, Phi phi, MapSource source) {
  if (feat.rank() != 3) {
    throw Error(ErrorKind::kDimension,
                "attention map expects [C x P x P], got " + ShapeString(feat.shape()));
  }
  const int64_t c = feat.dim(0), plane = feat.dim(1) * feat.dim(2);
  std::vector<double> sums(static_cast<size_t>(plane), 0.0);
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t i = 0; i < plane; ++i) {
      const double v = feat[ch * plane + i];
      sums[static_cast<size_t>(i)] += v * v;
    }
  }
  AttentionMap map{Tensor({feat.dim(1), feat.dim(2)}), source, phi, false};
  const bool all_zero = std::all_of(sums.begin(), sums.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    map.degenerate = true;
    return map;
  }
  auto out = map.values.mutable_data();
  switch (phi) {
    case Phi::kL2: {
      double norm = 0.0;
      for (double v : sums) norm += v * v;
      norm = std::sqrt(norm);
      for (int64_t i = 0; i < plane; ++i) out[i] = static_cast<float>(sums[i] / norm);
      break;
    }
    case Phi::kL1: {
      double total = 0.0;
      for (double v : sums) total += v;
      for (int64_t i = 0; i < plane; ++i) out[i] = static_cast<float>(sums[i] / total);
      break;
    }
    case Phi::kSoftmax: {
      const double mx = *std::max_element(sums.begin(), sums.end());
      double total = 0.0;
      for (double v : sums) total += std::exp(v - mx);
      for (int64_t i = 0; i < plane; ++i) {
        out[i] = static_cast<float>(std::exp(sums[i] - mx) / total);
      }
      break;
    }
  }
  return map;
}

double MapDistance(const AttentionMap& a, const AttentionMap& b) {
  if (a.values.shape() != b.values.shape()) {
    throw Error(ErrorKind::kDimension, "attention maps differ in shape: " +
                                           ShapeString(a.values.shape()) + " vs " +
                                           ShapeString(b.values.shape()));
  }
  double acc = 0.0;
  for (int64_t i = 0; i < a.values.size(); ++i) {
    const double d = static_cast<double>(a.values[i]) - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double TeacherAwareMetric(const Tensor& teacher_feat, const Tensor& student_feat, Phi phi) {
  if (teacher_feat.rank() != 4 || student_feat.rank() != 4) {
    throw Error(ErrorKind::kDimension, "teacher-aware metric expects rank-4 features, got " +
                                           ShapeString(teacher_feat.shape()) + " and " +
                                           ShapeString(student_feat.shape()));
  }
  if (teacher_feat.dim(0) != student_feat.dim(0)) {
    throw Error(ErrorKind::kDimension, "batch size mismatch: teacher " +
                                           ShapeString(teacher_feat.shape()) + ", student " +
                                           ShapeString(student_feat.shape()));
  }
  const int64_t batch = student_feat.dim(0);
  const int64_t ph = student_feat.dim(2), pw = student_feat.dim(3);
  double total = 0.0;
  for (int64_t i = 0; i < batch; ++i) {
    const Tensor resized = BilinearResize(teacher_feat.Slice(i), ph, pw);
    const AttentionMap t = ComputeAttentionMap(resized, phi, MapSource::kTeacher);
    const AttentionMap s = ComputeAttentionMap(student_feat.Slice(i), phi, MapSource::kStudent);
    total += MapDistance(t, s);
  }
  return total / static_cast<double>(batch);
}

std::vector<std::vector<std::string>> CapabilityGroups(const StudentModel& m,
                                                       CapabilityGrouping grouping) {
  std::vector<std::vector<std::string>> groups;
  std::string current;
  for (const auto& [name, tensor] : m.weights.entries()) {
    if (!name.ends_with(".weight") || tensor.rank() < 2) continue;  // skips biases, norms
    // Group key: "blocks.<i>" / "pools.<s>" / "patch_embed" / "head".
    std::string key = name.substr(0, name.find('.'));
    if (key == "blocks" || key == "pools") {
      key = name.substr(0, name.find('.', key.size() + 1));
    }
    if (grouping == CapabilityGrouping::kPerTensor || key != current || groups.empty()) {
      groups.emplace_back();
      current = key;
    }
    groups.back().push_back(name);
  }
  return groups;
}

double StudentCapabilityMetric(const StudentModel& m, CapabilityGrouping grouping) {
  double total = 0.0;
  for (const auto& group : CapabilityGroups(m, grouping)) {
    double squares = 0.0;
    for (const auto& name : group) squares += SumOfSquares(m.weights.Get(name));
    total += std::sqrt(squares);
  }
  return total;
}

Normalized MinMaxNormalize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kDegenerate, "min-max of an empty list");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kDegenerate, "min-max of non-finite value");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, max = *hi;
  Normalized out;
  out.values.resize(values.size(), 0.0);
  if (max == min) {
    out.degenerate = true;
    return out;
  }
  const double range = max - min;
  for (size_t i = 0; i < values.size(); ++i) out.values[i] = (values[i] - min) / range;
  return out;
}

TvtScores ComputeTvtScores(std::span<const RawMetrics> metrics, const ProxyConfig& cfg) {
  if (metrics.empty()) throw Error(ErrorKind::kDegenerate, "cannot score an empty population");
  std::vector<double> ms, mt;
  ms.reserve(metrics.size());
  mt.reserve(metrics.size());
  for (const RawMetrics& r : metrics) {
    ms.push_back(r.m_s);
    mt.push_back(r.m_t);
  }
  Normalized fs = MinMaxNormalize(ms);
  Normalized ft = MinMaxNormalize(mt);
  if (fs.degenerate && metrics.size() > 1) {
    Log().warn("degenerate population: all {} m_s values equal; f(m_s) set to 0", ms.size());
  }
  if (ft.degenerate && metrics.size() > 1) {
    Log().warn("degenerate population: all {} m_t values equal; f(m_t) set to 0", mt.size());
  }
  TvtScores out;
  out.tvt.resize(metrics.size());
  for (size_t i = 0; i < metrics.size(); ++i) {
    out.tvt[i] = cfg.alpha * fs.values[i] + cfg.beta * ft.values[i];
  }
  out.f_m_s = std::move(fs.values);
  out.f_m_t = std::move(ft.values);
  out.degenerate_m_s = fs.degenerate;
  out.degenerate_m_t = ft.degenerate;
  return out;
}

RawMetrics ScoreCandidateWithFeatures(const Genome& g, const Tensor& teacher_feat,
                                      const Tensor& batch, const ProxyConfig& cfg,
                                      uint64_t seed) {
  try {
    const StudentModel student = BuildStudent(g, seed);
    const Tensor tokens = StudentTokens(student, batch, cfg.student_block);
    RawMetrics r;
    r.m_t = TeacherAwareMetric(teacher_feat, tokens, cfg.phi);
    r.m_s = StudentCapabilityMetric(student, cfg.grouping);
    return r;
  } catch (const Error& e) {
    throw Error(e.kind(), "genome " + HashHex(GenomeHash(g)) + ": " + e.what());
  }
}

RawMetrics ScoreCandidate(const Genome& g, const TeacherModel& teacher, const Tensor& batch,
                          const ProxyConfig& cfg, uint64_t seed) {
  return ScoreCandidateWithFeatures(g, TeacherFeatures(teacher, batch), batch, cfg, seed);
}

nlohmann::ordered_json ScoredToJson(const ScoredCandidate& c) {
  nlohmann::ordered_json j;
  j["index"] = c.index;
  j["genome_hash"] = HashHex(c.genome_hash);
  j["genome"] = GenomeToJson(c.genome);
  j["params"] = c.params;
  j["seed"] = c.seed;
  j["m_s"] = c.m_s;
  j["m_t"] = c.m_t;
  j["f_m_s"] = c.f_m_s;
  j["f_m_t"] = c.f_m_t;
  j["tvt"] = c.tvt;
  return j;
}

ScoredCandidate ScoredFromJson(const nlohmann::json& j) {
  ScoredCandidate c;
  try {
    c.index = j.at("index").get<int64_t>();
    c.genome = GenomeFromJson(j.at("genome"));
    c.genome_hash = ParseHashHex(j.at("genome_hash").get<std::string>());
    c.params = j.at("params").get<int64_t>();
    c.seed = j.at("seed").get<uint64_t>();
    c.m_s = j.at("m_s").get<double>();
    c.m_t = j.at("m_t").get<double>();
    c.f_m_s = j.at("f_m_s").get<double>();
    c.f_m_t = j.at("f_m_t").get<double>();
    c.tvt = j.at("tvt").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed scored candidate: ") + e.what());
  }
  return c;
}

}  // namespace tvt
