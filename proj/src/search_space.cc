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

#include "tvt/search_space.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "tvt/error.h"

namespace tvt {

namespace {

[[noreturn]] void ConfigError(const std::string& msg) { throw Error(ErrorKind::kConfig, msg); }

template <typename T>
const T& Pick(const std::vector<T>& options, Rng& rng) {
  return options[static_cast<size_t>(rng.UniformIndex(options.size()))];
}

int64_t BlockParams(int64_t width, int64_t hidden) {
  return 2 * width                        // norm1
         + 3 * width * width + 3 * width  // qkv
         + width * width + width          // proj
         + 2 * width                      // norm2
         + hidden * width + hidden        // fc1
         + width * hidden + width;        // fc2
}

}  // namespace

const char* FamilyName(Family f) {
  return f == Family::kFlatViT ? "flat" : "hierarchical";
}

Family ParseFamily(const std::string& name) {
  if (name == "flat") return Family::kFlatViT;
  if (name == "hierarchical") return Family::kHierarchicalViT;
  ConfigError("unknown search-space family '" + name + "' (expected flat or hierarchical)");
}

int Genome::StageOfBlock(int block) const {
  if (family == Family::kFlatViT) return 0;
  int end = 0;
  for (int s = 0; s < static_cast<int>(stage_depths.size()); ++s) {
    end += stage_depths[static_cast<size_t>(s)];
    if (block < end) return s;
  }
  return static_cast<int>(stage_depths.size()) - 1;
}

int Genome::MlpHidden(int block) const {
  return static_cast<int>(
      std::lround(mlp_ratio[static_cast<size_t>(block)] * BlockWidth(block)));
}

int Genome::StageGrid(int stage) const {
  int grid = image_size / patch_size;
  // 3x3 stride-2 pad-1 pooling: ceil(grid / 2).
  for (int s = 0; s < stage; ++s) grid = (grid - 1) / 2 + 1;
  return grid;
}

void ValidateGenome(const Genome& g) {
  if (g.patch_size < 1 || g.image_size < 1 || g.image_size % g.patch_size != 0) {
    ConfigError("genome patch_size " + std::to_string(g.patch_size) +
                " must divide image_size " + std::to_string(g.image_size));
  }
  if (g.embed_dim < 1 || g.depth < 0 || g.num_classes < 1 || g.in_channels < 1) {
    ConfigError("genome has non-positive embed_dim/num_classes/in_channels or negative depth");
  }
  if (static_cast<int>(g.heads.size()) != g.depth ||
      static_cast<int>(g.mlp_ratio.size()) != g.depth) {
    ConfigError("genome heads/mlp_ratio lengths must equal depth " + std::to_string(g.depth));
  }
  for (int j = 0; j < g.depth; ++j) {
    const int h = g.heads[static_cast<size_t>(j)];
    if (h < 1 || g.embed_dim % h != 0) {
      ConfigError("genome heads[" + std::to_string(j) + "]=" + std::to_string(h) +
                  " does not divide embed_dim " + std::to_string(g.embed_dim));
    }
    if (!(g.mlp_ratio[static_cast<size_t>(j)] > 0.0)) {
      ConfigError("genome mlp_ratio[" + std::to_string(j) + "] must be positive");
    }
  }
  if (g.family == Family::kHierarchicalViT) {
    if (g.stage_depths.empty()) ConfigError("hierarchical genome needs stage_depths");
    const int total = std::accumulate(g.stage_depths.begin(), g.stage_depths.end(), 0);
    if (total != g.depth) ConfigError("genome stage_depths must sum to depth");
  } else if (!g.stage_depths.empty()) {
    ConfigError("flat genome must not carry stage_depths");
  }
}

nlohmann::ordered_json GenomeToJson(const Genome& g) {
  nlohmann::ordered_json j;
  j["space_id"] = g.space_id;
  j["family"] = FamilyName(g.family);
  j["image_size"] = g.image_size;
  j["in_channels"] = g.in_channels;
  j["num_classes"] = g.num_classes;
  j["patch_size"] = g.patch_size;
  j["depth"] = g.depth;
  j["embed_dim"] = g.embed_dim;
  j["heads"] = g.heads;
  j["mlp_ratio"] = g.mlp_ratio;
  if (g.family == Family::kHierarchicalViT) j["stage_depths"] = g.stage_depths;
  return j;
}

Genome GenomeFromJson(const nlohmann::json& j) {
  Genome g;
  try {
    g.space_id = j.at("space_id").get<std::string>();
    g.family = ParseFamily(j.at("family").get<std::string>());
    g.image_size = j.at("image_size").get<int>();
    g.in_channels = j.value("in_channels", 3);
    g.num_classes = j.at("num_classes").get<int>();
    g.patch_size = j.at("patch_size").get<int>();
    g.depth = j.at("depth").get<int>();
    g.embed_dim = j.at("embed_dim").get<int>();
    g.heads = j.at("heads").get<std::vector<int>>();
    g.mlp_ratio = j.at("mlp_ratio").get<std::vector<double>>();
    if (j.contains("stage_depths")) g.stage_depths = j["stage_depths"].get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed genome: ") + e.what());
  }
  ValidateGenome(g);
  return g;
}

std::string CanonicalJson(const Genome& g) { return GenomeToJson(g).dump(); }

uint64_t Fnv1a64(std::string_view bytes, uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t GenomeHash(const Genome& g) { return Fnv1a64(CanonicalJson(g)); }

std::string HashHex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

uint64_t ParseHashHex(const std::string& hex) {
  if (hex.size() != 16 || hex.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
    throw Error(ErrorKind::kParse, "genome hash must be 16 hex digits, got '" + hex + "'");
  }
  return std::stoull(hex, nullptr, 16);
}

int64_t ParamCount(const Genome& g) {
  const int64_t e = g.embed_dim;
  const int64_t p = g.patch_size;
  const int64_t grid = g.image_size / g.patch_size;
  int64_t total = e * g.in_channels * p * p + e;  // patch embedding
  total += e;                                     // class token
  if (g.family == Family::kFlatViT) {
    total += (grid * grid + 1) * e;  // positional embedding incl. class slot
  } else {
    total += e * grid * grid;  // spatial positional embedding
  }
  for (int b = 0; b < g.depth; ++b) total += BlockParams(g.BlockWidth(b), g.MlpHidden(b));
  for (int s = 0; s + 1 < g.num_stages(); ++s) {
    const int64_t w = g.StageWidth(s);
    total += 2 * w * 9 + 2 * w;  // depthwise 3x3 pooling conv, channel multiplier 2
    total += 2 * w * w + 2 * w;  // class-token projection
  }
  const int64_t last = g.StageWidth(g.num_stages() - 1);
  total += 2 * last;                                // final norm
  total += g.num_classes * last + g.num_classes;    // classifier
  return total;
}

void ValidateSpace(const SearchSpaceSpec& s) {
  auto nonempty = [](bool empty, const char* gene) {
    if (empty) ConfigError(std::string("search space gene '") + gene + "' has no options");
  };
  nonempty(s.patch_size.empty(), "patch_size");
  nonempty(s.embed_dim.empty(), "embed_dim");
  nonempty(s.heads.empty(), "heads");
  nonempty(s.mlp_ratio.empty(), "mlp_ratio");
  if (s.family == Family::kFlatViT) {
    nonempty(s.depth.empty(), "depth");
  } else {
    nonempty(s.stage_depths.empty(), "stage_depths");
    for (const auto& opts : s.stage_depths) nonempty(opts.empty(), "stage_depths");
  }
  if (s.image_size < 1 || s.num_classes < 1 || s.in_channels < 1) {
    ConfigError("search space image_size, num_classes and in_channels must be positive");
  }
  if (!(s.min_params < s.max_params)) {
    ConfigError("search space param_range must satisfy min < max");
  }
  for (int p : s.patch_size) {
    if (p < 1 || s.image_size % p != 0) {
      ConfigError("gene 'patch_size' option " + std::to_string(p) + " does not divide image_size " +
                  std::to_string(s.image_size));
    }
  }
  for (int d : s.depth) {
    if (d < 0) ConfigError("gene 'depth' option must be non-negative");
  }
  for (const auto& opts : s.stage_depths) {
    for (int d : opts) {
      if (d < 0) ConfigError("gene 'stage_depths' option must be non-negative");
    }
  }
  for (int e : s.embed_dim) {
    for (int h : s.heads) {
      if (h < 1 || e < 1 || e % h != 0) {
        ConfigError("gene 'heads' option " + std::to_string(h) +
                    " does not divide gene 'embed_dim' option " + std::to_string(e));
      }
    }
  }
  for (double r : s.mlp_ratio) {
    if (!(r > 0.0)) ConfigError("gene 'mlp_ratio' options must be positive");
  }
}

SearchSpaceSpec SpaceFromJson(const nlohmann::json& j) {
  SearchSpaceSpec s;
  try {
    s.id = j.at("id").get<std::string>();
    s.family = ParseFamily(j.at("family").get<std::string>());
    s.image_size = j.at("image_size").get<int>();
    s.in_channels = j.value("in_channels", 3);
    s.num_classes = j.at("num_classes").get<int>();
    const auto& range = j.at("param_range");
    if (!range.is_array() || range.size() != 2) ConfigError("param_range must be [min, max]");
    s.min_params = static_cast<int64_t>(range[0].get<double>());
    s.max_params = static_cast<int64_t>(range[1].get<double>());
    const auto& c = j.at("choices");
    s.patch_size = c.at("patch_size").get<std::vector<int>>();
    s.embed_dim = c.at("embed_dim").get<std::vector<int>>();
    s.heads = c.at("heads").get<std::vector<int>>();
    s.mlp_ratio = c.at("mlp_ratio").get<std::vector<double>>();
    if (c.contains("depth")) s.depth = c["depth"].get<std::vector<int>>();
    if (c.contains("stage_depths")) {
      s.stage_depths = c["stage_depths"].get<std::vector<std::vector<int>>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed search space: ") + e.what());
  }
  ValidateSpace(s);
  return s;
}

nlohmann::ordered_json SpaceToJson(const SearchSpaceSpec& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["family"] = FamilyName(s.family);
  j["image_size"] = s.image_size;
  j["in_channels"] = s.in_channels;
  j["num_classes"] = s.num_classes;
  j["param_range"] = {s.min_params, s.max_params};
  nlohmann::ordered_json c;
  c["patch_size"] = s.patch_size;
  if (s.family == Family::kFlatViT) {
    c["depth"] = s.depth;
  } else {
    c["stage_depths"] = s.stage_depths;
  }
  c["embed_dim"] = s.embed_dim;
  c["heads"] = s.heads;
  c["mlp_ratio"] = s.mlp_ratio;
  j["choices"] = c;
  return j;
}

SearchSpaceSpec LoadSpace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kConfig, "cannot open search space " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return SpaceFromJson(j);
}

Genome SampleGenome(const SearchSpaceSpec& spec, Rng& rng) {
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    Genome g;
    g.space_id = spec.id;
    g.family = spec.family;
    g.image_size = spec.image_size;
    g.in_channels = spec.in_channels;
    g.num_classes = spec.num_classes;
    g.patch_size = Pick(spec.patch_size, rng);
    if (spec.family == Family::kFlatViT) {
      g.depth = Pick(spec.depth, rng);
    } else {
      for (const auto& opts : spec.stage_depths) g.stage_depths.push_back(Pick(opts, rng));
      g.depth = std::accumulate(g.stage_depths.begin(), g.stage_depths.end(), 0);
    }
    g.embed_dim = Pick(spec.embed_dim, rng);
    for (int b = 0; b < g.depth; ++b) {
      g.heads.push_back(Pick(spec.heads, rng));
      g.mlp_ratio.push_back(Pick(spec.mlp_ratio, rng));
    }
    const int64_t n = ParamCount(g);
    if (n >= spec.min_params && n <= spec.max_params) return g;
  }
  throw Error(ErrorKind::kInfeasibleBudget,
              "no genome of space '" + spec.id + "' within param_range [" +
                  std::to_string(spec.min_params) + ", " + std::to_string(spec.max_params) +
                  "] after " + std::to_string(kMaxSampleAttempts) + " attempts");
}

std::vector<Genome> SamplePopulation(const SearchSpaceSpec& spec, int n, Rng& rng) {
  if (n < 1) ConfigError("population size must be >= 1");
  const Rng base(rng.NextU64());
  std::vector<Genome> population;
  population.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng child = base.Child(static_cast<uint64_t>(i));
    population.push_back(SampleGenome(spec, child));
  }
  return population;
}

}  // namespace tvt
