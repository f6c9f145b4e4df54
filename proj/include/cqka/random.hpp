// Copyright 2026 The CQKA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CQKA_RANDOM_HPP
#define CQKA_RANDOM_HPP

#include <cstdint>
#include <random>

namespace cqka {

/// Mixes a 64-bit value (splitmix64 finalizer). Used to derive per-unit seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for work unit `index` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Seedable randomness injected into every stochastic operation.
///
/// Sampling is done by hand on top of the raw mt19937_64 stream instead of
/// std distributions, whose output is implementation-defined, so that a
/// seed reproduces the same transcript on any standard library.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool coin() { return (engine_() >> 63) != 0; }

    /// True with probability p.
    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Independent child stream for sub-unit `index`.
    RandomSource split(std::uint64_t index) const { return RandomSource(derive_seed(seed_, index)); }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace cqka

#endif  // CQKA_RANDOM_HPP
