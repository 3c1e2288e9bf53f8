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

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tvt/tensor.h"

namespace tvt {

// Named tensors in insertion order.
class WeightMap {
 public:
  using Entry = std::pair<std::string, Tensor>;

  void Add(std::string name, Tensor t);
  bool Contains(const std::string& name) const { return index_.count(name) > 0; }
  // Throws ErrorKind::kMissingTensor.
  const Tensor& Get(const std::string& name) const;
  // Replaces an existing tensor; the shape must be unchanged.
  void Set(const std::string& name, Tensor t);

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  int64_t TotalElements() const;

  bool operator==(const WeightMap& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace tvt
