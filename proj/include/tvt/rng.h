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

#include <cstdint>

namespace tvt {

uint64_t SplitMix64(uint64_t x);

// Child seed for stream `index` of `seed`. Used for per-candidate, per-run
// and per-tensor streams so results never depend on scheduling order.
uint64_t DeriveSeed(uint64_t seed, uint64_t index);

// Counter-based generator: the n-th draw is a pure function of (seed, n).
// Not thread-safe; give each worker its own instance via Child().
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed) {}

  uint64_t seed() const { return seed_; }
  uint64_t counter() const { return counter_; }

  uint64_t NextU64();
  // Uniform in [0, 1).
  double NextDouble();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * NextDouble(); }
  // Uniform integer in [0, n); n > 0.
  uint64_t UniformIndex(uint64_t n);
  // Standard normal via Box-Muller; consumes two draws.
  double Normal();

  Rng Child(uint64_t stream) const { return Rng(DeriveSeed(seed_, stream)); }

 private:
  uint64_t seed_;
  uint64_t counter_ = 0;
};

}  // namespace tvt
