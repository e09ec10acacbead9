// Copyright 2026 The Spanfield Authors.
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

#ifndef SPANFIELD_RANDOM_H_
#define SPANFIELD_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

namespace spanfield {

// Seeded random source. Wraps std::mt19937_64 (whose output sequence is fixed
// by the standard) and derives every distribution from raw engine bits, so
// results do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);

  // Uniform integer in [lo, hi] inclusive.
  int64_t UniformRange(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(UniformInt(static_cast<uint64_t>(hi - lo) + 1));
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Standard normal via Box-Muller (one value per call, no caching).
  double Normal();

  // Normal(0, stddev) resampled until it falls within two standard deviations.
  double TruncatedNormal(double stddev);

  // Fisher-Yates permutation of [0, n).
  std::vector<int64_t> Permutation(int64_t n);

  template <typename T>
  const T& Pick(const std::vector<T>& items) {
    return items[UniformInt(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive sub-seeds and
// per-element dropout decisions from a seed and a counter.
uint64_t MixBits(uint64_t x);

inline uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  return MixBits(seed ^ MixBits(stream + 0x9e3779b97f4a7c15ULL));
}

}  // namespace spanfield

#endif  // SPANFIELD_RANDOM_H_
