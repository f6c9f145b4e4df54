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

#ifndef CQKA_PARALLEL_HPP
#define CQKA_PARALLEL_HPP

#include <cstddef>
#include <cstdint>
#include <exception>

#include "cqka/random.hpp"

namespace cqka {

enum class Execution { Serial, Parallel };

/// Sessions per work unit. Each unit gets its own derived seed, so results
/// do not depend on the number of threads.
inline constexpr std::size_t kUnitSize = 1024;

inline std::size_t units_for(std::size_t sessions) { return (sessions + kUnitSize - 1) / kUnitSize; }

/// Runs fn(unit, rng, acc) for every unit in [0, units) and merges the
/// per-thread accumulators with `Acc::merge`. The serial path is the
/// reference; with count-valued accumulators both paths agree exactly.
template <typename Acc, typename Fn>
Acc run_units(std::size_t units, std::uint64_t master_seed, Execution exec, Fn &&fn) {
    Acc total{};
    if (exec == Execution::Serial) {
        for (std::size_t u = 0; u < units; u++) {
            RandomSource rng(derive_seed(master_seed, u));
            fn(u, rng, total);
        }
        return total;
    }
    std::exception_ptr failure;
#pragma omp parallel
    {
        Acc local{};
#pragma omp for schedule(dynamic)
        for (std::size_t u = 0; u < units; u++) {
            try {
                RandomSource rng(derive_seed(master_seed, u));
                fn(u, rng, local);
            } catch (...) {
#pragma omp critical(cqka_failure)
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
#pragma omp critical(cqka_merge)
        total.merge(local);
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return total;
}

/// Number of sessions handled by unit `u` out of `sessions`.
inline std::size_t unit_sessions(std::size_t u, std::size_t sessions) {
    std::size_t begin = u * kUnitSize;
    return sessions - begin < kUnitSize ? sessions - begin : kUnitSize;
}

}  // namespace cqka

#endif  // CQKA_PARALLEL_HPP
