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

#include "tvt/weight_map.h"

#include "tvt/error.h"

namespace tvt {

void WeightMap::Add(std::string name, Tensor t) {
  if (Contains(name)) throw Error(ErrorKind::kConfig, "duplicate tensor name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(t));
}

const Tensor& WeightMap::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kMissingTensor, "missing tensor '" + name + "'");
  return entries_[it->second].second;
}

void WeightMap::Set(const std::string& name, Tensor t) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kMissingTensor, "missing tensor '" + name + "'");
  Tensor& slot = entries_[it->second].second;
  if (slot.shape() != t.shape()) {
    throw Error(ErrorKind::kDimension, "tensor '" + name + "' has shape " +
                                           ShapeString(slot.shape()) + ", got " +
                                           ShapeString(t.shape()));
  }
  slot = std::move(t);
}

int64_t WeightMap::TotalElements() const {
  int64_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

}  // namespace tvt
