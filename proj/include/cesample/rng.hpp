// Copyright 2026 The cesample Authors
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

#ifndef CESAMPLE_RNG_HPP_
#define CESAMPLE_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace cesample {

// SplitMix64 finalizer. Used only for seed derivation, never as a stream.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for stream `tag` under `parent`. Streams are split as a tree:
// a repetition gets derive_seed(master, ...) and each stage inside a sampler
// derives again from that, so no two consumers share a generator.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::uint64_t tag) noexcept {
  return mix64(parent ^ mix64(tag + 0x632BE59BD9B4E019ULL));
}

// Portable random stream: std::mt19937_64 (output sequence fixed by the
// standard) with hand-written range reduction, since the standard
// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; one variate per call.
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

  // k distinct values from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cesample

#endif  // CESAMPLE_RNG_HPP_
