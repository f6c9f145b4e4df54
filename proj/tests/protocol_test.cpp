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

#include "cqka/protocol.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <set>

#include "cqka/adversary.hpp"

using namespace cqka;

namespace {

TwoBit tb(int hi, int lo) { return TwoBit{ClassicalBit(hi), ClassicalBit(lo)}; }

}  // namespace

TEST(Maps, outcome_encoding) {
    ASSERT_EQ(encode_outcome(BellState::PhiPlus), tb(0, 0));
    ASSERT_EQ(encode_outcome(BellState::PhiMinus), tb(0, 1));
    ASSERT_EQ(encode_outcome(BellState::PsiPlus), tb(1, 0));
    ASSERT_EQ(encode_outcome(BellState::PsiMinus), tb(1, 1));
    for (auto b : kAllBellStates) {
        ASSERT_EQ(decode_outcome(encode_outcome(b)), b);
    }
}

TEST(Maps, charlie_bits) {
    ASSERT_EQ(charlie_bit(BellState::PhiPlus), 0);
    ASSERT_EQ(charlie_bit(BellState::PhiMinus), 1);
    ASSERT_EQ(charlie_state(0), BellState::PhiPlus);
    ASSERT_EQ(charlie_state(1), BellState::PhiMinus);
    ASSERT_THROW(charlie_bit(BellState::PsiPlus), QcoreError);
}

TEST(Maps, bob_announcement) {
    ASSERT_EQ(bob_announce_bit(BellState::PsiMinus), 0);
    ASSERT_EQ(bob_announce_bit(BellState::PhiPlus), 0);
    ASSERT_EQ(bob_announce_bit(BellState::PsiPlus), 1);
    ASSERT_EQ(bob_announce_bit(BellState::PhiMinus), 1);
}

TEST(Maps, final_key_bit) {
    ASSERT_EQ(final_key_bit(tb(1, 0), tb(0, 0)), 1);
    ASSERT_EQ(final_key_bit(tb(1, 1), tb(1, 1)), 0);
    ASSERT_EQ(final_key_bit(tb(1, 1), tb(1, 0)), 1);
    ASSERT_EQ(final_key_bit(tb(0, 1), tb(1, 0)), 0);
}

TEST(InferCounterpart, table_examples) {
    ASSERT_EQ(infer_counterpart(0, 0, 1, tb(0, 0), Role::Alice), tb(1, 0));
    ASSERT_EQ(infer_counterpart(0, 0, 0, tb(0, 0), Role::Alice), tb(0, 0));
    ASSERT_EQ(infer_counterpart(1, 1, 0, tb(1, 1), Role::Bob), tb(1, 0));
    ASSERT_EQ(infer_counterpart_two_party(0, 1, tb(0, 0), Role::Alice), tb(1, 0));
    ASSERT_EQ(final_key_bit(tb(0, 0), tb(1, 0)), 1);
    ASSERT_EQ(infer_counterpart_two_party(1, 1, tb(1, 1), Role::Alice), tb(1, 0));
    ASSERT_EQ(final_key_bit(tb(1, 1), tb(1, 0)), 1);
}

TEST(InferCounterpart, outside_table_is_reported) {
    // With k_C = 0 and k_A = 0, Alice only ever sees phi outcomes.
    ASSERT_FALSE(infer_counterpart(0, 0, 0, tb(1, 0), Role::Alice).has_value());
    ASSERT_FALSE(infer_counterpart_two_party(0, 0, tb(1, 1), Role::Alice).has_value());
}

TEST(Tables, sizes_and_two_party_subset) {
    ASSERT_EQ(controlled_key_table().size(), 16u);
    ASSERT_EQ(two_party_key_table().size(), 8u);
    for (const auto &row : two_party_key_table()) {
        ASSERT_EQ(row.k_c, row.k_a);
        bool found = false;
        for (const auto &full : controlled_key_table()) {
            found = found || (full.k_c == row.k_c && full.k_a == row.k_a && full.k_b == row.k_b &&
                              full.r_a == row.r_a && full.r_b == row.r_b && full.key == row.key);
        }
        ASSERT_TRUE(found);
    }
}

TEST(Tables, closure_from_both_sides) {
    // Every Born-possible (preparation, outcome) pair is a table row, and
    // each side recovers the other's outcome.
    std::set<std::tuple<int, int, int, int, int, int>> reached;
    for (const auto &prep : all_preparations()) {
        StateVector s{Factor::basis("1", BasisChoice::Z, prep.alice), Factor::bell("2", "3", charlie_state(prep.charlie)),
                      Factor::basis("4", BasisChoice::Z, prep.bob)};
        s.cnot("2", "1");
        s.cnot("3", "4");
        for (auto a : kAllBellStates) {
            for (auto b : kAllBellStates) {
                double p = project(project(s, Factor::bell("1", "2", a)), Factor::bell("3", "4", b)).norm_squared();
                bool possible = p > 1e-12;
                ASSERT_EQ(possible, is_expected_outcome(prep, a, b));
                if (!possible) {
                    continue;
                }
                ClassicalBit k_b = bob_announce_bit(b);
                TwoBit r_a = encode_outcome(a), r_b = encode_outcome(b);
                ASSERT_EQ(infer_counterpart(prep.charlie, prep.alice, k_b, r_a, Role::Alice), r_b);
                ASSERT_EQ(infer_counterpart(prep.charlie, prep.alice, k_b, r_b, Role::Bob), r_a);
                ClassicalBit key = final_key_bit(r_a, r_b);
                ASSERT_EQ(key, prep.charlie ^ prep.alice ^ prep.bob);
                reached.insert({prep.charlie, prep.alice, k_b, r_a.hi * 2 + r_a.lo, r_b.hi * 2 + r_b.lo, key});
            }
        }
    }
    ASSERT_EQ(reached.size(), 16u);
    for (const auto &row : controlled_key_table()) {
        ASSERT_TRUE(reached.count({row.k_c, row.k_a, row.k_b, row.r_a.hi * 2 + row.r_a.lo,
                                   row.r_b.hi * 2 + row.r_b.lo, row.key}));
    }
}

TEST(Tables, expected_outcomes_agree_and_most_others_mismatch) {
    for (const auto &prep : all_preparations()) {
        std::size_t silent = 0;
        for (auto a : kAllBellStates) {
            for (auto b : kAllBellStates) {
                ClassicalBit k_b = bob_announce_bit(b);
                TwoBit r_a = encode_outcome(a), r_b = encode_outcome(b);
                auto rb_guess = infer_counterpart(prep.charlie, prep.alice, k_b, r_a, Role::Alice);
                auto ra_guess = infer_counterpart(prep.charlie, prep.alice, k_b, r_b, Role::Bob);
                bool mismatch = !rb_guess || !ra_guess ||
                                final_key_bit(r_a, *rb_guess) != final_key_bit(*ra_guess, r_b);
                if (is_expected_outcome(prep, a, b)) {
                    ASSERT_FALSE(mismatch);
                } else {
                    silent += !mismatch;
                }
            }
        }
        // Two of the fourteen unexpected pairs read as a consistent row.
        ASSERT_EQ(silent, 2u);
    }
}

TEST(CharliePrepare, maps_and_balance) {
    RandomSource rng(1);
    auto prep = charlie_prepare(100000, rng);
    std::size_t plus = 0;
    for (std::size_t i = 0; i < prep.states.size(); i++) {
        ASSERT_EQ(prep.k_c[i], charlie_bit(prep.states[i]));
        plus += prep.states[i] == BellState::PhiPlus;
    }
    ASSERT_NEAR(plus / 1e5, 0.5, 3 * 0.5 / std::sqrt(1e5));
    ASSERT_THROW(charlie_prepare(0, rng), QcoreError);
}

TEST(Decoys, placement) {
    RandomSource rng(2);
    ASSERT_TRUE(insert_decoys(10, 0, rng).empty());
    for (int trial = 0; trial < 200; trial++) {
        auto d = insert_decoys(7, 9, rng);
        ASSERT_EQ(d.size(), 9u);
        std::set<std::size_t> pos;
        for (const auto &s : d) {
            ASSERT_LT(s.position, 16u);
            pos.insert(s.position);
        }
        ASSERT_EQ(pos.size(), 9u);
    }
    std::size_t z = 0, ones = 0;
    auto many = insert_decoys(0, 100000, rng);
    for (const auto &s : many) {
        z += s.basis == BasisChoice::Z;
        ones += s.bit;
    }
    double sigma = 0.5 / std::sqrt(1e5);
    ASSERT_NEAR(z / 1e5, 0.5, 3 * sigma);
    ASSERT_NEAR(ones / 1e5, 0.5, 3 * sigma);
}

TEST(Decoys, verification) {
    std::vector<DecoySpec> specs;
    std::vector<DecoyReading> reads;
    for (std::size_t k = 0; k < 10; k++) {
        specs.push_back({k, BasisChoice::X, 0});
        reads.push_back({k, BasisChoice::X, ClassicalBit(k < 3)});
    }
    auto c = verify_decoys(reads, specs, 0.1);
    ASSERT_DOUBLE_EQ(c.error_rate, 0.3);
    ASSERT_FALSE(c.pass);
    reads[0].position = 5;
    ASSERT_THROW(verify_decoys(reads, specs, 0.1), QcoreError);
    ASSERT_THROW(verify_decoys(std::span<const DecoyReading>(reads).first(3), specs, 0.1), QcoreError);
}

TEST(PublicBoard, controller_first) {
    PublicBoard b(1);
    ASSERT_THROW(b.announce_participants({0}, {1}), QcoreError);
    b.announce_controller({1});
    ASSERT_THROW(b.announce_controller({1}), QcoreError);
    b.announce_participants({0}, {1});
    ASSERT_EQ(b.entries().size(), 3u);
    ASSERT_EQ(b.entries()[0].who, Party::Charlie);
    ASSERT_LT(b.entries()[0].round, b.entries()[1].round);
    PublicBoard two(2);
    ASSERT_THROW(two.announce_controller({0}), QcoreError);
    two.announce_participants({0}, {0});
}

TEST(Participant, encode_measure_outcomes) {
    RandomSource rng(3);
    std::set<std::pair<BellState, BellState>> seen;
    for (int k = 0; k < 200; k++) {
        StateVector reg{Factor::bell("2", "3", BellState::PhiPlus)};
        auto a = participant_encode_measure(reg, "2", "1", 0, rng);
        auto b = participant_encode_measure(reg, "3", "4", 1, rng);
        ASSERT_EQ(a.r, encode_outcome(a.outcome));
        seen.insert({a.outcome, b.outcome});
    }
    std::set<std::pair<BellState, BellState>> expected = {{BellState::PhiPlus, BellState::PsiPlus},
                                                          {BellState::PhiMinus, BellState::PsiMinus}};
    ASSERT_EQ(seen, expected);

    seen.clear();
    for (int k = 0; k < 200; k++) {
        StateVector reg{Factor::bell("2", "3", BellState::PhiMinus)};
        auto a = participant_encode_measure(reg, "2", "1", 1, rng);
        auto b = participant_encode_measure(reg, "3", "4", 1, rng);
        seen.insert({a.outcome, b.outcome});
    }
    expected = {{BellState::PsiPlus, BellState::PsiMinus}, {BellState::PsiMinus, BellState::PsiPlus}};
    ASSERT_EQ(seen, expected);
}

TEST(RunProtocol1, honest_keys_agree) {
    RandomSource rng(4);
    SessionOptions o;
    o.n = 16;
    for (int k = 0; k < 200; k++) {
        auto t = run_protocol1(o, rng);
        ASSERT_FALSE(t.aborted) << t.abort_reason;
        ASSERT_EQ(t.final_key_alice.size(), 16u);
        ASSERT_EQ(t.final_key_alice, t.final_key_bob);
        ASSERT_EQ(t.decoy_error_rate, 0.0);
        ASSERT_EQ(t.decoys_first.size(), 16u);
        ASSERT_EQ(t.decoys_second.size(), 16u);
        ASSERT_EQ(t.board.entries().front().who, Party::Charlie);
        for (std::size_t i = 0; i < t.n; i++) {
            ASSERT_FALSE(t.detected(i));
        }
    }
}

TEST(RunProtocol1, single_bit_example) {
    SessionOptions o;
    o.n = 1;
    o.forcing.charlie = 0;
    o.forcing.alice = 0;
    o.forcing.bob = 1;
    bool seen = false;
    for (std::uint64_t seed = 0; seed < 64 && !seen; seed++) {
        RandomSource rng(seed);
        auto t = run_protocol1(o, rng);
        if (t.r_a[0] == tb(0, 0)) {
            seen = true;
            ASSERT_EQ(t.k_c[0], 0);
            ASSERT_EQ(t.k_a[0], 0);
            ASSERT_EQ(t.k_b[0], 1);
            ASSERT_EQ(t.final_key_alice[0], 1);
            ASSERT_EQ(t.r_b[0], tb(1, 0));
        }
    }
    ASSERT_TRUE(seen);
}

TEST(RunProtocol1, intercept_resend_aborts) {
    RandomSource rng(5);
    InterceptResendTap tap;
    SessionOptions o;
    o.n = 16;
    o.p = 5000;
    o.tap_ca = &tap;
    o.tap_cb = &tap;
    auto t = run_protocol1(o, rng);
    ASSERT_TRUE(t.aborted);
    ASSERT_TRUE(t.final_key_alice.empty());
    ASSERT_NEAR(t.decoy_error_rate, 0.25, 3 * std::sqrt(0.25 * 0.75 / 10000));
}

TEST(RunProtocol1, rejects_bad_options) {
    RandomSource rng(6);
    SessionOptions o;
    o.n = 0;
    ASSERT_THROW(run_protocol1(o, rng), QcoreError);
    o.n = 2;
    o.tolerance = 1.5;
    ASSERT_THROW(run_protocol1(o, rng), QcoreError);
}

TEST(RunProtocol1, deterministic) {
    SessionOptions o;
    o.n = 8;
    RandomSource a(77), b(77);
    ASSERT_EQ(transcript_to_json(run_protocol1(o, a)), transcript_to_json(run_protocol1(o, b)));
}

TEST(RunProtocol2, honest_keys_agree) {
    RandomSource rng(7);
    SessionOptions o;
    o.n = 16;
    for (int k = 0; k < 200; k++) {
        auto t = run_protocol2(o, rng);
        ASSERT_FALSE(t.aborted) << t.abort_reason;
        ASSERT_EQ(t.final_key_alice, t.final_key_bob);
        ASSERT_EQ(t.k_c, t.k_a);
        ASSERT_TRUE(t.decoys_second.empty());
        ASSERT_EQ(t.board.entries().size(), 2u);
    }
}

TEST(RunProtocol2, rejects_controller_hooks) {
    RandomSource rng(8);
    InterceptResendTap tap;
    SessionOptions o;
    o.tap_ca = &tap;
    ASSERT_THROW(run_protocol2(o, rng), QcoreError);
}

TEST(Transcript, json_fields) {
    RandomSource rng(9);
    SessionOptions o;
    o.n = 4;
    o.p = 2;
    auto t = run_protocol1(o, rng);
    auto j = nlohmann::json::parse(transcript_to_json(t));
    ASSERT_EQ(j["protocol"], 1);
    ASSERT_EQ(j["n"], 4);
    ASSERT_EQ(j["p"], 2);
    ASSERT_EQ(j["aborted"], false);
    ASSERT_EQ(j["final_key_alice"].get<std::string>().size(), 4u);
    ASSERT_EQ(j["final_key_alice"], j["final_key_bob"]);
    ASSERT_EQ(j["announcements"].size(), 3u);
    ASSERT_EQ(j["announcements"][0]["who"], "charlie");
    ASSERT_EQ(j["decoys_first"].size(), 2u);
}
