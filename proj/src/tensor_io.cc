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

#include "tvt/tensor_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "tvt/error.h"

namespace tvt {

namespace {

uint32_t ToLittle(uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

}  // namespace

void WriteTensor(std::ostream& os, const Tensor& t) {
  nlohmann::ordered_json header;
  header["shape"] = t.shape();
  header["dtype"] = "f32";
  os << header.dump() << '\n';
  for (float v : t.data()) {
    uint32_t bits = ToLittle(std::bit_cast<uint32_t>(v));
    os.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
  }
  if (!os) throw Error(ErrorKind::kIo, "failed writing tensor payload");
}

Tensor ReadTensor(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::kParse, "missing tensor header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("bad tensor header: ") + e.what());
  }
  if (!header.contains("shape") || header.value("dtype", "") != "f32") {
    throw Error(ErrorKind::kParse, "tensor header needs shape and dtype f32: " + line);
  }
  Shape shape = header["shape"].get<Shape>();
  std::vector<float> data(static_cast<size_t>(NumElements(shape)));
  for (float& v : data) {
    uint32_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
      throw Error(ErrorKind::kParse, "truncated tensor payload for shape " + ShapeString(shape));
    }
    v = std::bit_cast<float>(ToLittle(bits));
  }
  return Tensor(std::move(shape), std::move(data));
}

void SaveTensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  WriteTensor(os, t);
}

Tensor LoadTensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot open tensor file " + path.string());
  return ReadTensor(is);
}

}  // namespace tvt
