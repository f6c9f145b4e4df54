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

#include "cqka/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace cqka;

TEST(RandomSource, same_seed_same_stream) {
    RandomSource a(42), b(42);
    for (int k = 0; k < 100; k++) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(RandomSource, derived_seeds_differ) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t u = 0; u < 1000; u++) {
        seen.insert(derive_seed(7, u));
    }
    ASSERT_EQ(seen.size(), 1000u);
    ASSERT_NE(derive_seed(7, 0), derive_seed(8, 0));
    ASSERT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(RandomSource, uniform_in_unit_interval) {
    RandomSource r(1);
    double sum = 0;
    for (int k = 0; k < 100000; k++) {
        double x = r.uniform();
        ASSERT_GE(x, 0.0);
        ASSERT_LT(x, 1.0);
        sum += x;
    }
    ASSERT_NEAR(sum / 100000, 0.5, 3 * std::sqrt(1.0 / 12 / 100000));
}

TEST(RandomSource, below_is_bounded_and_rejects_zero) {
    RandomSource r(2);
    std::size_t counts[5] = {};
    for (int k = 0; k < 50000; k++) {
        auto v = r.below(5);
        ASSERT_LT(v, 5u);
        counts[v]++;
    }
    for (auto c : counts) {
        ASSERT_NEAR(c / 50000.0, 0.2, 3 * std::sqrt(0.2 * 0.8 / 50000));
    }
    ASSERT_THROW(r.below(0), std::invalid_argument);
}

TEST(RandomSource, coin_is_balanced) {
    RandomSource r(3);
    int heads = 0;
    for (int k = 0; k < 100000; k++) {
        heads += r.coin();
    }
    ASSERT_NEAR(heads / 100000.0, 0.5, 3 * 0.5 / std::sqrt(100000.0));
}

TEST(RandomSource, split_is_deterministic) {
    RandomSource r(9);
    auto a = r.split(4);
    auto b = r.split(4);
    ASSERT_EQ(a.next_u64(), b.next_u64());
    ASSERT_EQ(a.seed(), derive_seed(9, 4));
}
