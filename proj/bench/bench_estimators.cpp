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


#include <benchmark/benchmark.h>

#include "cqka/analysis.hpp"

namespace {

void BM_CollectiveDetection(benchmark::State &state) {
    cqka::EstimatorOptions opt;
    opt.sessions = static_cast<std::size_t>(state.range(0));
    opt.exec = state.range(1) ? cqka::Execution::Parallel : cqka::Execution::Serial;
    auto attack = cqka::CollectiveParams::symmetric(cqka::kHalfPi / 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cqka::estimate_detection(attack, opt).estimate);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CollectiveDetection)->Args({10000, 0})->Args({10000, 1})->Unit(benchmark::kMillisecond);

void BM_HonestSessions(benchmark::State &state) {
    cqka::Forcing none;
    cqka::EstimatorOptions opt;
    opt.sessions = 2000;
    opt.exec = state.range(0) ? cqka::Execution::Parallel : cqka::Execution::Serial;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cqka::fairness_report(none, opt).estimate);
    }
}
BENCHMARK(BM_HonestSessions)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
