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

#include <cmath>

namespace cqka {

namespace {

constexpr double kNormTol = 1e-12;

void check_angle(double x, const char *what) {
    if (!std::isfinite(x) || x < 0 || x > 2 * kHalfPi) {
        throw QcoreError(std::string(what) + " must lie in [0, pi]");
    }
}

void check_amplitudes(double A, double B, const char *side) {
    if (!std::isfinite(A) || !std::isfinite(B) || std::abs(A * A + B * B - 1) > kNormTol) {
        throw QcoreError(std::string("A^2 + B^2 must equal 1 on the ") + side + " side");
    }
}

std::vector<Complex> to_complex(const AncillaVector &v) { return {v[0], v[1], v[2], v[3]}; }

ClassicalBit measure_ancillas(StateVector &reg, const std::array<QubitLabel, 2> &labels, double alpha, double beta,
                              RandomSource &rng, int &outcome) {
    auto basis = eve_basis(alpha, beta);
    std::vector<std::vector<Complex>> vecs;
    for (const auto &v : basis) {
        vecs.push_back(to_complex(v));
    }
    outcome = static_cast<int>(reg.measure(labels, vecs, rng));
    return eve_channel_bit(outcome);
}

}  // namespace

void ImpersonationParams::validate() const {
    double s = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
    if (!std::isfinite(s) || std::abs(s - 1) > kNormTol) {
        throw QcoreError("impersonation amplitudes must satisfy |a|^2+|b|^2+|c|^2+|d|^2 = 1");
    }
}

CollectiveParams CollectiveParams::symmetric(double alpha) {
    CollectiveParams p;
    p.alpha_zeta = alpha;
    p.alpha_eta = alpha;
    return p;
}

void CollectiveParams::validate() const {
    check_amplitudes(A_zeta, B_zeta, "zeta");
    check_amplitudes(A_eta, B_eta, "eta");
    check_angle(alpha_zeta, "alpha_zeta");
    check_angle(beta_zeta, "beta_zeta");
    check_angle(alpha_eta, "alpha_eta");
    check_angle(beta_eta, "beta_eta");
    if (!(e >= 0 && e <= 1)) {
        throw QcoreError("decision bias e must lie in [0, 1]");
    }
}

std::string attack_name(const AttackStrategy &attack) {
    struct Visitor {
        std::string operator()(const NoAttack &) const { return "none"; }
        std::string operator()(const ImpersonationParams &) const { return "impersonation"; }
        std::string operator()(const CollectiveParams &) const { return "collective"; }
        std::string operator()(const InterceptResend &) const { return "intercept_resend"; }
    };
    return std::visit(Visitor{}, attack);
}

AncillaVectors build_ancilla_vectors(double alpha, double beta) {
    check_angle(alpha, "alpha");
    check_angle(beta, "beta");
    AncillaVectors v;
    v.v00 = {1, 0, 0, 0};
    v.v01 = {0, 1, 0, 0};
    v.v10 = {0, std::cos(beta), std::sin(beta), 0};
    v.v11 = {std::cos(alpha), 0, 0, std::sin(alpha)};
    return v;
}

double inner(const AncillaVector &x, const AncillaVector &y) {
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}

IsometryColumns entangling_columns(double A, double B, double alpha, double beta) {
    auto v = build_ancilla_vectors(alpha, beta);
    IsometryColumns c;
    c.column0.assign(8, 0);
    c.column1.assign(8, 0);
    for (int k = 0; k < 4; k++) {
        c.column0[0 + 2 * k] += A * v.v00[k];
        c.column0[1 + 2 * k] += B * v.v01[k];
        c.column1[0 + 2 * k] += B * v.v10[k];
        c.column1[1 + 2 * k] += A * v.v11[k];
    }
    return c;
}

std::array<QubitLabel, 2> zeta_labels() { return {QubitLabel("zeta.0"), QubitLabel("zeta.1")}; }
std::array<QubitLabel, 2> eta_labels() { return {QubitLabel("eta.0"), QubitLabel("eta.1")}; }

CollectiveTap::CollectiveTap(double A, double B, double alpha, double beta, std::array<QubitLabel, 2> ancillas)
    : columns_(entangling_columns(A, B, alpha, beta)), ancillas_(std::move(ancillas)) {}

void CollectiveTap::intercept(StateVector &reg, const QubitLabel &in_flight, RandomSource &) {
    reg.isometry(in_flight, ancillas_, columns_.column0, columns_.column1);
}

CollectiveTapPair collective_tap(const CollectiveParams &params) {
    params.validate();
    CollectiveTapPair taps;
    taps.ca = std::make_unique<CollectiveTap>(params.A_zeta, params.B_zeta, params.alpha_zeta, params.beta_zeta,
                                              zeta_labels());
    taps.cb =
        std::make_unique<CollectiveTap>(params.A_eta, params.B_eta, params.alpha_eta, params.beta_eta, eta_labels());
    return taps;
}

void InterceptResendTap::intercept(StateVector &reg, const QubitLabel &in_flight, RandomSource &rng) {
    BasisChoice basis = rng.coin() ? BasisChoice::X : BasisChoice::Z;
    auto m = measure_single(std::move(reg), in_flight, basis, rng);
    reg = std::move(m.state);
}

ImpersonationSource::ImpersonationSource(const ImpersonationParams &p)
    : pair_(Factor::joint({"2", "3"}, {p.a, p.c, p.b, p.d})) {
    p.validate();
}

SourceEmission ImpersonationSource::emit(std::size_t, std::optional<ClassicalBit> forced, RandomSource &rng) {
    return {pair_, forced ? *forced : ClassicalBit(rng.coin())};
}

std::unique_ptr<ImpersonationSource> impersonate_source(const ImpersonationParams &params) {
    return std::make_unique<ImpersonationSource>(params);
}

std::array<AncillaVector, 2> helstrom_pair(const AncillaVector &u, const AncillaVector &u_perp, double theta) {
    // Measurement vectors sit at +-pi/4 around the bisector of the two states.
    double phi0 = theta / 2 - kHalfPi / 2;
    double phi1 = theta / 2 + kHalfPi / 2;
    std::array<AncillaVector, 2> m;
    for (int k = 0; k < 4; k++) {
        m[0][k] = std::cos(phi0) * u[k] + std::sin(phi0) * u_perp[k];
        m[1][k] = std::cos(phi1) * u[k] + std::sin(phi1) * u_perp[k];
    }
    return m;
}

std::array<AncillaVector, 4> eve_basis(double alpha, double beta) {
    AncillaVector e0{1, 0, 0, 0}, e1{0, 1, 0, 0}, e2{0, 0, 1, 0}, e3{0, 0, 0, 1};
    auto diag = helstrom_pair(e0, e3, alpha);
    auto off = helstrom_pair(e1, e2, beta);
    return {diag[0], diag[1], off[0], off[1]};
}

ClassicalBit eve_channel_bit(int outcome) {
    switch (outcome) {
        case 0:
            return 0;
        case 1:
            return 1;
        case 2:
            return 1;
        case 3:
            return 0;
    }
    throw QcoreError("ancilla outcome must be in 0..3");
}

std::string eve_outcome_name(int outcome) {
    static const char *names[] = {"00", "11", "01", "10"};
    if (outcome < 0 || outcome > 3) {
        throw QcoreError("ancilla outcome must be in 0..3");
    }
    return names[outcome];
}

double eve_model_error(const CollectiveParams &p) {
    return (1 - std::sin(p.alpha_zeta) * std::sin(p.alpha_eta)) / 2;
}

EveGuess eve_measure_and_guess(StateVector &reg, ClassicalBit k_c, ClassicalBit k_a, const CollectiveParams &p,
                               RandomSource &rng) {
    auto zl = zeta_labels();
    auto el = eta_labels();
    if (!reg.has(zl[0]) || !reg.has(el[0])) {
        throw QcoreError("register carries no ancillas from the collective taps");
    }
    EveGuess g{};
    ClassicalBit jz = measure_ancillas(reg, zl, p.alpha_zeta, p.beta_zeta, rng, g.zeta_outcome);
    ClassicalBit je = measure_ancillas(reg, el, p.alpha_eta, p.beta_eta, rng, g.eta_outcome);
    ClassicalBit h = k_c ^ k_a ^ jz ^ je;
    double q = eve_model_error(p);
    double post0 = p.e * (h == 0 ? 1 - q : q);
    double post1 = (1 - p.e) * (h == 1 ? 1 - q : q);
    if (post0 > post1) {
        g.guess = 0;
    } else if (post1 > post0) {
        g.guess = 1;
    } else {
        g.guess = rng.bernoulli(p.e) ? 0 : 1;
    }
    return g;
}

void EveObserver::observe(const RoundView &view, StateVector &reg, RandomSource &rng) {
    auto g = eve_measure_and_guess(reg, view.k_c, view.k_a, params_, rng);
    record_.zeta_outcomes.push_back(g.zeta_outcome);
    record_.eta_outcomes.push_back(g.eta_outcome);
    record_.guesses.push_back(g.guess);
}

void AttackHooks::install(const AttackStrategy &attack, SessionOptions &o, int protocol) {
    if (std::holds_alternative<InterceptResend>(attack)) {
        if (protocol == 1) {
            o.tap_ca = &intercept;
            o.tap_cb = &intercept;
        } else {
            o.tap_ab = &intercept;
        }
        return;
    }
    if (std::holds_alternative<NoAttack>(attack)) {
        return;
    }
    if (protocol != 1) {
        throw QcoreError(attack_name(attack) + " attack needs the controlled protocol");
    }
    if (auto *c = std::get_if<CollectiveParams>(&attack)) {
        collective = collective_tap(*c);
        o.tap_ca = collective.ca.get();
        o.tap_cb = collective.cb.get();
    } else if (auto *i = std::get_if<ImpersonationParams>(&attack)) {
        source = impersonate_source(*i);
        o.source = source.get();
    }
}

StateVector attacked_state(const Preparation &prep, const CollectiveParams *params,
                           const ImpersonationParams *source) {
    Factor pair = Factor::bell("2", "3", charlie_state(prep.charlie));
    if (source) {
        source->validate();
        pair = Factor::joint({"2", "3"}, {source->a, source->c, source->b, source->d});
    }
    StateVector reg{Factor::basis("1", BasisChoice::Z, prep.alice), pair,
                    Factor::basis("4", BasisChoice::Z, prep.bob)};
    if (params) {
        auto taps = collective_tap(*params);
        RandomSource unused(0);
        taps.ca->intercept(reg, "2", unused);
        taps.cb->intercept(reg, "3", unused);
    }
    reg.cnot("2", "1");
    reg.cnot("3", "4");
    return reg;
}

std::array<std::array<double, 4>, 4> joint_bell_distribution(const StateVector &state) {
    std::array<std::array<double, 4>, 4> out{};
    for (auto a : kAllBellStates) {
        auto left = project(state, Factor::bell("1", "2", a));
        for (auto b : kAllBellStates) {
            out[static_cast<int>(a)][static_cast<int>(b)] = project(left, Factor::bell("3", "4", b)).norm_squared();
        }
    }
    return out;
}

double exact_detection(const Preparation &prep, const CollectiveParams *params, const ImpersonationParams *source) {
    auto dist = joint_bell_distribution(attacked_state(prep, params, source));
    double kept = 0;
    for (const auto &t : expected_terms(prep)) {
        kept += dist[static_cast<int>(t.alice)][static_cast<int>(t.bob)];
    }
    return std::max(0.0, 1 - kept);
}

}  // namespace cqka
