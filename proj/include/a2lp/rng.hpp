// Copyright 2026 The a2lp Authors
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

#ifndef A2LP_RNG_HPP_
#define A2LP_RNG_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include "a2lp/matrix.hpp"

namespace a2lp {

std::uint64_t splitmix64(std::uint64_t x);

// mt19937_64 behind explicitly specified draws. The standard distributions
// are implementation-defined, so bounded integers and normals are derived
// here to keep sampled episodes identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, n), unbiased. n must be positive.
  Index uniform_index(Index n);

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();

  // Standard normal (Marsaglia polar method).
  double normal();

  // First `count` entries become a uniform sample without replacement.
  template <typename T>
  void partial_shuffle(std::span<T> items, Index count) {
    for (Index i = 0; i < count && i + 1 < items.size(); ++i) {
      const Index j = i + uniform_index(items.size() - i);
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace a2lp

#endif  // A2LP_RNG_HPP_
