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

#include <filesystem>
#include <iosfwd>

#include "tvt/tensor.h"

namespace tvt {

// Tensor file layout: one UTF-8 JSON header line {"shape":[...],"dtype":"f32"}
// terminated by '\n', then product(shape) little-endian float32 values.
void WriteTensor(std::ostream& os, const Tensor& t);
Tensor ReadTensor(std::istream& is);

void SaveTensor(const std::filesystem::path& path, const Tensor& t);
Tensor LoadTensor(const std::filesystem::path& path);

}  // namespace tvt
