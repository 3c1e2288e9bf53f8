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

#include "tvt/teacher.h"

#include <cmath>
#include <fstream>

#include "tvt/error.h"
#include "tvt/kernels.h"
#include "tvt/tensor_io.h"

namespace tvt {

namespace {

constexpr const char* kManifestFormat = "tvt-teacher-v1";

std::string StageName(size_t s) { return "stage" + std::to_string(s + 1); }

bool NeedsShortcut(const TeacherConfig& cfg, size_t s, int in_channels) {
  return s > 0 || in_channels != cfg.stage_channels[s];
}

// Per-channel affine on [C x H x W].
Tensor ChannelAffine(const Tensor& x, const Tensor& scale, const Tensor& shift) {
  Tensor out(x.shape());
  const int64_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t i = 0; i < plane; ++i) {
      out[ch * plane + i] = x[ch * plane + i] * scale[ch] + shift[ch];
    }
  }
  return out;
}

Tensor ConvNorm(const WeightMap& w, const std::string& prefix, const std::string& norm,
                const Tensor& x, int stride) {
  const Tensor& k = w.Get(prefix + ".weight");
  const int pad = static_cast<int>(k.dim(2) / 2);
  Tensor y = Conv2d(x, k, nullptr, stride, pad);
  return ChannelAffine(y, w.Get(norm + ".scale"), w.Get(norm + ".shift"));
}

void Validate(const TeacherConfig& cfg) {
  if (cfg.in_channels < 1 || cfg.image_size < 1 || cfg.stem_channels < 1 ||
      cfg.stem_kernel < 1 || cfg.stage_kernel < 1) {
    throw Error(ErrorKind::kConfig, "teacher config sizes must be positive");
  }
  for (int c : cfg.stage_channels) {
    if (c < 1) throw Error(ErrorKind::kConfig, "teacher stage channels must be positive");
  }
  const std::string tap = cfg.ResolvedTap();
  bool known = tap == "stem";
  for (size_t s = 0; s < cfg.stage_channels.size(); ++s) known |= tap == StageName(s);
  if (!known) throw Error(ErrorKind::kConfig, "unknown teacher tap point '" + tap + "'");
}

}  // namespace

std::string TeacherConfig::ResolvedTap() const {
  if (!tap_point.empty()) return tap_point;
  return stage_channels.empty() ? "stem" : StageName(stage_channels.size() - 1);
}

nlohmann::ordered_json TeacherConfigToJson(const TeacherConfig& cfg) {
  nlohmann::ordered_json j;
  j["in_channels"] = cfg.in_channels;
  j["image_size"] = cfg.image_size;
  j["stem_channels"] = cfg.stem_channels;
  j["stem_kernel"] = cfg.stem_kernel;
  j["stage_channels"] = cfg.stage_channels;
  j["stage_kernel"] = cfg.stage_kernel;
  j["block"] = cfg.block == TeacherBlock::kBasic ? "basic" : "plain";
  j["tap_point"] = cfg.ResolvedTap();
  return j;
}

TeacherConfig TeacherConfigFromJson(const nlohmann::json& j) {
  TeacherConfig cfg;
  try {
    cfg.in_channels = j.value("in_channels", cfg.in_channels);
    cfg.image_size = j.value("image_size", cfg.image_size);
    cfg.stem_channels = j.value("stem_channels", cfg.stem_channels);
    cfg.stem_kernel = j.value("stem_kernel", cfg.stem_kernel);
    cfg.stage_channels = j.value("stage_channels", cfg.stage_channels);
    cfg.stage_kernel = j.value("stage_kernel", cfg.stage_kernel);
    const std::string block = j.value("block", std::string("basic"));
    if (block == "basic") {
      cfg.block = TeacherBlock::kBasic;
    } else if (block == "plain") {
      cfg.block = TeacherBlock::kPlain;
    } else {
      throw Error(ErrorKind::kConfig, "unknown teacher block '" + block + "'");
    }
    cfg.tap_point = j.value("tap_point", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed teacher config: ") + e.what());
  }
  Validate(cfg);
  return cfg;
}

std::vector<std::pair<std::string, Shape>> TeacherLayout(const TeacherConfig& cfg) {
  std::vector<std::pair<std::string, Shape>> out;
  auto conv = [&](const std::string& name, int64_t co, int64_t ci, int64_t k) {
    out.emplace_back(name + ".weight", Shape{co, ci, k, k});
  };
  auto norm = [&](const std::string& name, int64_t c) {
    out.emplace_back(name + ".scale", Shape{c});
    out.emplace_back(name + ".shift", Shape{c});
  };
  conv("stem.conv", cfg.stem_channels, cfg.in_channels, cfg.stem_kernel);
  norm("stem.norm", cfg.stem_channels);
  int prev = cfg.stem_channels;
  for (size_t s = 0; s < cfg.stage_channels.size(); ++s) {
    const std::string pre = StageName(s);
    const int c = cfg.stage_channels[s];
    conv(pre + ".conv1", c, prev, cfg.stage_kernel);
    norm(pre + ".norm1", c);
    if (cfg.block == TeacherBlock::kBasic) {
      conv(pre + ".conv2", c, c, cfg.stage_kernel);
      norm(pre + ".norm2", c);
      if (NeedsShortcut(cfg, s, prev)) {
        conv(pre + ".shortcut", c, prev, 1);
        norm(pre + ".shortcut_norm", c);
      }
    }
    prev = c;
  }
  return out;
}

TeacherModel RandomTeacher(const TeacherConfig& cfg, uint64_t seed) {
  Validate(cfg);
  TeacherModel t{cfg, {}};
  const Rng root(seed);
  uint64_t index = 0;
  for (auto& [name, shape] : TeacherLayout(cfg)) {
    Rng rng = root.Child(index++);
    if (shape.size() == 4) {
      const float std = std::sqrt(2.0f / static_cast<float>(shape[1] * shape[2] * shape[3]));
      t.weights.Add(name, TruncNormalInit(rng, shape, std));
    } else if (name.ends_with(".scale")) {
      t.weights.Add(name, Tensor::Full(shape, 1.0f));
    } else {
      t.weights.Add(name, Tensor::Zeros(shape));
    }
  }
  return t;
}

void SaveTeacher(const std::filesystem::path& dir, const TeacherModel& t) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = kManifestFormat;
  manifest["architecture"] = TeacherConfigToJson(t.config);
  manifest["tap_point"] = t.config.ResolvedTap();
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& [name, tensor] : t.weights.entries()) {
    const std::string file = name + ".tensor";
    SaveTensor(dir / file, tensor);
    tensors.push_back({{"name", name}, {"file", file}});
  }
  manifest["tensors"] = tensors;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + (dir / "manifest.json").string());
  os << manifest.dump(2) << '\n';
}

TeacherModel LoadTeacher(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream is(manifest_path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open teacher manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kManifestFormat) {
    throw Error(ErrorKind::kParse, manifest_path.string() + ": unsupported teacher format");
  }
  TeacherConfig cfg = TeacherConfigFromJson(manifest.at("architecture"));
  if (manifest.contains("tap_point")) {
    cfg.tap_point = manifest["tap_point"].get<std::string>();
    Validate(cfg);
  }
  std::unordered_map<std::string, std::string> files;
  for (const auto& entry : manifest.at("tensors")) {
    files[entry.at("name").get<std::string>()] = entry.at("file").get<std::string>();
  }
  TeacherModel t{cfg, {}};
  for (const auto& [name, shape] : TeacherLayout(cfg)) {
    auto it = files.find(name);
    if (it == files.end()) {
      throw Error(ErrorKind::kMissingTensor,
                  "teacher checkpoint " + dir.string() + " is missing tensor '" + name + "'");
    }
    Tensor tensor = LoadTensor(dir / it->second);
    if (tensor.shape() != shape) {
      throw Error(ErrorKind::kDimension, "teacher tensor '" + name + "' has shape " +
                                             ShapeString(tensor.shape()) + ", expected " +
                                             ShapeString(shape));
    }
    t.weights.Add(name, std::move(tensor));
  }
  return t;
}

Tensor TeacherFeatures(const TeacherModel& t, const Tensor& batch) {
  const TeacherConfig& cfg = t.config;
  if (batch.rank() != 4 || batch.dim(1) != cfg.in_channels || batch.dim(2) != cfg.image_size ||
      batch.dim(3) != cfg.image_size) {
    throw Error(ErrorKind::kDimension,
                "teacher expects [B x " + std::to_string(cfg.in_channels) + " x " +
                    std::to_string(cfg.image_size) + " x " + std::to_string(cfg.image_size) +
                    "], got " + ShapeString(batch.shape()));
  }
  const std::string tap = cfg.ResolvedTap();
  const WeightMap& w = t.weights;
  std::vector<Tensor> features;
  for (int64_t i = 0; i < batch.dim(0); ++i) {
    Tensor x = Relu(ConvNorm(w, "stem.conv", "stem.norm", batch.Slice(i), 1));
    int prev = cfg.stem_channels;
    for (size_t s = 0; s < cfg.stage_channels.size() && tap != "stem"; ++s) {
      const std::string pre = StageName(s);
      const int stride = s == 0 ? 1 : 2;
      Tensor y = ConvNorm(w, pre + ".conv1", pre + ".norm1", x, stride);
      if (cfg.block == TeacherBlock::kPlain) {
        x = Relu(y);
      } else {
        y = ConvNorm(w, pre + ".conv2", pre + ".norm2", Relu(y), 1);
        Tensor shortcut = NeedsShortcut(cfg, s, prev)
                              ? ConvNorm(w, pre + ".shortcut", pre + ".shortcut_norm", x, stride)
                              : x;
        x = Relu(Add(y, shortcut));
      }
      prev = cfg.stage_channels[s];
      if (tap == pre) break;
    }
    features.push_back(std::move(x));
  }
  return Stack(features);
}

}  // namespace tvt
