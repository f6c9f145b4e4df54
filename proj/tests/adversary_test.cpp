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

#include "cqka/adversary.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cqka/analysis.hpp"

using namespace cqka;

namespace {

CollectiveParams random_params(RandomSource &rng) {
    CollectiveParams p;
    double tz = rng.uniform() * kHalfPi, te = rng.uniform() * kHalfPi;
    p.A_zeta = std::cos(tz);
    p.B_zeta = std::sin(tz);
    p.A_eta = std::cos(te);
    p.B_eta = std::sin(te);
    p.alpha_zeta = rng.uniform() * 2 * kHalfPi;
    p.beta_zeta = rng.uniform() * 2 * kHalfPi;
    p.alpha_eta = rng.uniform() * 2 * kHalfPi;
    p.beta_eta = rng.uniform() * 2 * kHalfPi;
    return p;
}

ImpersonationParams random_impersonation(RandomSource &rng) {
    double v[8], s = 0;
    for (auto &x : v) {
        x = rng.uniform() - 0.5;
        s += x * x;
    }
    s = std::sqrt(s);
    return {{v[0] / s, v[1] / s}, {v[2] / s, v[3] / s}, {v[4] / s, v[5] / s}, {v[6] / s, v[7] / s}};
}

}  // namespace

TEST(AncillaVectors, constraints_hold) {
    for (double a = 0; a <= 2 * kHalfPi; a += 0.1) {
        for (double b = 0; b <= 2 * kHalfPi; b += 0.1) {
            auto v = build_ancilla_vectors(a, b);
            for (const auto *x : {&v.v00, &v.v01, &v.v10, &v.v11}) {
                ASSERT_NEAR(inner(*x, *x), 1, 1e-12);
            }
            ASSERT_NEAR(inner(v.v00, v.v10) + inner(v.v01, v.v11), 0, 1e-10);
            ASSERT_NEAR(inner(v.v00, v.v11), std::cos(a), 1e-10);
            ASSERT_NEAR(inner(v.v01, v.v10), std::cos(b), 1e-10);
            ASSERT_NEAR(inner(v.v00, v.v01), 0, 1e-10);
            ASSERT_NEAR(inner(v.v00, v.v10), 0, 1e-10);
            ASSERT_NEAR(inner(v.v10, v.v11), 0, 1e-10);
            ASSERT_NEAR(inner(v.v01, v.v11), 0, 1e-10);
        }
    }
}

TEST(AncillaVectors, special_angles) {
    auto o = build_ancilla_vectors(kHalfPi, kHalfPi);
    const AncillaVector *all[] = {&o.v00, &o.v01, &o.v10, &o.v11};
    for (int i = 0; i < 4; i++) {
        for (int j = 0; j < 4; j++) {
            ASSERT_NEAR(inner(*all[i], *all[j]), i == j ? 1 : 0, 1e-12);
        }
    }
    auto same = build_ancilla_vectors(0, kHalfPi);
    for (int k = 0; k < 4; k++) {
        ASSERT_NEAR(same.v11[k], same.v00[k], 1e-12);
    }
    ASSERT_THROW(build_ancilla_vectors(-0.1, 0), QcoreError);
}

TEST(CollectiveParams, validation) {
    CollectiveParams p;
    p.validate();
    p.A_zeta = 0.9;
    ASSERT_THROW(p.validate(), QcoreError);
    p = CollectiveParams{};
    p.e = 1.5;
    ASSERT_THROW(p.validate(), QcoreError);
    ImpersonationParams bad{{1, 0}, {1, 0}, {0, 0}, {0, 0}};
    ASSERT_THROW(bad.validate(), QcoreError);
    ASSERT_THROW(impersonate_source(bad), QcoreError);
}

TEST(CollectiveTap, preserves_norm) {
    RandomSource rng(1);
    for (int k = 0; k < 100; k++) {
        auto p = random_params(rng);
        auto taps = collective_tap(p);
        StateVector reg{Factor::bell("2", "3", BellState::PhiMinus)};
        taps.ca->intercept(reg, "2", rng);
        taps.cb->intercept(reg, "3", rng);
        ASSERT_EQ(reg.num_qubits(), 6u);
        ASSERT_NEAR(reg.norm_squared(), 1, 1e-12);
    }
}

TEST(CollectiveTap, zero_angle_recovers_honest_statistics) {
    auto p = CollectiveParams::symmetric(0);
    for (const auto &prep : all_preparations()) {
        auto honest = joint_bell_distribution(attacked_state(prep, nullptr, nullptr));
        auto tapped = joint_bell_distribution(attacked_state(prep, &p, nullptr));
        for (int a = 0; a < 4; a++) {
            for (int b = 0; b < 4; b++) {
                ASSERT_NEAR(honest[a][b], tapped[a][b], 1e-12);
            }
        }
        ASSERT_NEAR(exact_detection(prep, &p, nullptr), 0, 1e-12);
    }
}

TEST(CollectiveTap, orthogonal_ancillas_branch_structure) {
    // After Alice and Bob measure, Eve's ancillas sit in zeta00 eta00 or zeta11 eta11.
    auto p = CollectiveParams::symmetric(kHalfPi);
    auto s = attacked_state({0, 0, 1}, &p, nullptr);
    auto v = build_ancilla_vectors(kHalfPi, kHalfPi);
    auto anc = [&](const AncillaVector &x, const AncillaVector &y) {
        return std::vector<Factor>{Factor::joint({"zeta.0", "zeta.1"}, {x[0], x[1], x[2], x[3]}),
                                   Factor::joint({"eta.0", "eta.1"}, {y[0], y[1], y[2], y[3]})};
    };
    double w00 = 0, w11 = 0;
    for (auto a : {BellState::PhiPlus, BellState::PhiMinus}) {
        for (auto b : {BellState::PsiPlus, BellState::PsiMinus}) {
            auto f0 = anc(v.v00, v.v00);
            f0.push_back(Factor::bell("1", "2", a));
            f0.push_back(Factor::bell("3", "4", b));
            auto f1 = anc(v.v11, v.v11);
            f1.push_back(Factor::bell("1", "2", a));
            f1.push_back(Factor::bell("3", "4", b));
            Complex c0 = amplitude_of(s, f0), c1 = amplitude_of(s, f1);
            ASSERT_NEAR(std::abs(c0), 0.5 * kInvSqrt2, 1e-10);
            ASSERT_NEAR(std::abs(c1), 0.5 * kInvSqrt2, 1e-10);
            w00 += std::norm(c0);
            w11 += std::norm(c1);
        }
    }
    ASSERT_NEAR(w00, 0.5, 1e-10);
    ASSERT_NEAR(w11, 0.5, 1e-10);
}

TEST(CollectiveTap, detection_matches_closed_form_and_is_preparation_free) {
    RandomSource rng(2);
    for (int k = 0; k < 50; k++) {
        auto p = random_params(rng);
        double d = detection_derived(p);
        for (const auto &prep : all_preparations()) {
            ASSERT_NEAR(exact_detection(prep, &p, nullptr), d, 1e-12);
        }
    }
}

TEST(Impersonation, average_detection_is_half) {
    RandomSource rng(3);
    for (int k = 0; k < 50; k++) {
        auto ip = random_impersonation(rng);
        ASSERT_NEAR(detection_exact(ip), 0.5, 1e-12);
    }
    ImpersonationParams product{{1, 0}, {0, 0}, {0, 0}, {0, 0}};
    ASSERT_NEAR(detection_exact(product), 0.5, 1e-12);
}

TEST(Impersonation, source_emits_requested_state) {
    RandomSource rng(4);
    ImpersonationParams ip{{0.5, 0}, {0.5, 0}, {-0.5, 0}, {0, 0.5}};
    auto src = impersonate_source(ip);
    auto e = src->emit(0, std::nullopt, rng);
    StateVector reg{e.pair};
    auto z = [](const char *q, int b) { return Factor::basis(q, BasisChoice::Z, ClassicalBit(b)); };
    ASSERT_NEAR(std::abs(amplitude_of(reg, {z("2", 0), z("3", 1)}) - Complex(0.5, 0)), 0, 1e-12);
    ASSERT_NEAR(std::abs(amplitude_of(reg, {z("2", 1), z("3", 0)}) - Complex(-0.5, 0)), 0, 1e-12);
    ASSERT_NEAR(std::abs(amplitude_of(reg, {z("2", 1), z("3", 1)}) - Complex(0, 0.5)), 0, 1e-12);
    ASSERT_EQ(src->emit(1, ClassicalBit(1), rng).announced, 1);
}

TEST(Helstrom, success_probability) {
    for (double a = 0; a <= kHalfPi + 1e-9; a += kHalfPi / 10) {
        auto basis = eve_basis(a, kHalfPi / 3);
        auto v = build_ancilla_vectors(a, kHalfPi / 3);
        for (int i = 0; i < 4; i++) {
            for (int j = 0; j < 4; j++) {
                ASSERT_NEAR(inner(basis[i], basis[j]), i == j ? 1 : 0, 1e-12);
            }
        }
        double p00 = std::pow(inner(basis[0], v.v00), 2);
        double p11 = std::pow(inner(basis[1], v.v11), 2);
        ASSERT_NEAR(p00, (1 + std::sin(a)) / 2, 1e-12);
        ASSERT_NEAR(p11, (1 + std::sin(a)) / 2, 1e-12);
    }
}

TEST(EveGuess, model_error_examples) {
    ASSERT_NEAR(eve_model_error(CollectiveParams::symmetric(kHalfPi)), 0, 1e-12);
    ASSERT_NEAR(eve_model_error(CollectiveParams::symmetric(0)), 0.5, 1e-12);
    CollectiveParams p;
    p.alpha_zeta = kHalfPi;
    p.alpha_eta = kHalfPi / 3;
    ASSERT_NEAR(eve_model_error(p), 0.25, 1e-12);
}

TEST(EveGuess, needs_ancillas) {
    RandomSource rng(5);
    StateVector reg{Factor::bell("2", "3", BellState::PhiPlus)};
    ASSERT_THROW(eve_measure_and_guess(reg, 0, 0, CollectiveParams{}, rng), QcoreError);
}

TEST(EveGuess, reads_channel_parity_exactly_with_orthogonal_ancillas) {
    RandomSource rng(6);
    auto p = CollectiveParams::symmetric(kHalfPi);
    auto taps = collective_tap(p);
    for (int k = 0; k < 200; k++) {
        StateVector reg{Factor::bell("2", "3", charlie_state(ClassicalBit(k & 1)))};
        taps.ca->intercept(reg, "2", rng);
        taps.cb->intercept(reg, "3", rng);
        auto m = measure_single(std::move(reg), "2", BasisChoice::Z, rng);
        auto g = eve_measure_and_guess(m.state, 0, 0, p, rng);
        ASSERT_EQ(eve_channel_bit(g.zeta_outcome), m.outcome);
        ASSERT_EQ(eve_channel_bit(g.eta_outcome), m.outcome);
    }
}

TEST(InterceptResend, born_rule_cases) {
    // Z decoy read in Z is undisturbed; an X decoy read in Z flips half the time.
    auto zero = StateVector{Factor::basis("q", BasisChoice::Z, 0)};
    auto plus = StateVector{Factor::basis("q", BasisChoice::X, 0)};
    auto zq = std::vector<QubitLabel>{"q"};
    auto z_basis = std::vector<std::vector<Complex>>{{1, 0}, {0, 1}};
    ASSERT_NEAR(zero.probabilities(zq, z_basis)[1], 0, 1e-12);
    ASSERT_NEAR(plus.probabilities(zq, z_basis)[1], 0.5, 1e-12);
    auto collapsed = StateVector{Factor::basis("q", BasisChoice::Z, 0)};
    auto x_basis = std::vector<std::vector<Complex>>{{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
    ASSERT_NEAR(collapsed.probabilities(zq, x_basis)[1], 0.5, 1e-12);
}

TEST(InterceptResend, decoy_error_quarter) {
    RandomSource rng(7);
    InterceptResendTap tap;
    std::size_t errors = 0, total = 20000;
    for (std::size_t k = 0; k < total; k++) {
        BasisChoice basis = k % 2 ? BasisChoice::X : BasisChoice::Z;
        ClassicalBit bit = (k / 2) % 2;
        StateVector reg{Factor::basis("d", basis, bit)};
        tap.intercept(reg, "d", rng);
        errors += measure_single(std::move(reg), "d", basis, rng).outcome != bit;
    }
    ASSERT_NEAR(errors / double(total), 0.25, 3 * std::sqrt(0.25 * 0.75 / total));
}

TEST(AttackHooks, protocol_constraints) {
    SessionOptions o;
    AttackHooks h;
    ASSERT_THROW(h.install(CollectiveParams{}, o, 2), QcoreError);
    h.install(InterceptResend{}, o, 2);
    ASSERT_NE(o.tap_ab, nullptr);
    ASSERT_EQ(o.tap_ca, nullptr);
    ASSERT_EQ(attack_name(InterceptResend{}), "intercept_resend");
}
