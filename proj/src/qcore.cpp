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

#include "cqka/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cqka {

namespace {

constexpr double kUnitTolerance = 1e-10;

double squared_norm(std::span<const Complex> v) {
    double s = 0;
    for (const auto &a : v) {
        s += std::norm(a);
    }
    return s;
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
    Complex s = 0;
    for (std::size_t k = 0; k < a.size(); k++) {
        s += std::conj(a[k]) * b[k];
    }
    return s;
}

std::size_t position_in(std::span<const QubitLabel> labels, const QubitLabel &q) {
    auto it = std::find(labels.begin(), labels.end(), q);
    if (it == labels.end()) {
        throw QcoreError("unknown qubit label '" + q.name() + "'");
    }
    return static_cast<std::size_t>(it - labels.begin());
}

/// Where a subsystem's bits sit inside a register index.
struct Subsystem {
    std::size_t mask = 0;
    std::vector<std::size_t> offsets;  // offsets[s] = register bits for sub-index s
};

Subsystem locate(std::span<const QubitLabel> register_labels, std::span<const QubitLabel> sub) {
    std::vector<std::size_t> pos;
    pos.reserve(sub.size());
    for (const auto &q : sub) {
        std::size_t p = position_in(register_labels, q);
        if (std::find(pos.begin(), pos.end(), p) != pos.end()) {
            throw QcoreError("qubit label '" + q.name() + "' addressed twice");
        }
        pos.push_back(p);
    }
    Subsystem s;
    s.offsets.assign(std::size_t{1} << sub.size(), 0);
    for (std::size_t k = 0; k < pos.size(); k++) {
        s.mask |= std::size_t{1} << pos[k];
    }
    for (std::size_t idx = 0; idx < s.offsets.size(); idx++) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < pos.size(); k++) {
            if ((idx >> k) & 1) {
                off |= std::size_t{1} << pos[k];
            }
        }
        s.offsets[idx] = off;
    }
    return s;
}

void check_basis(std::span<const std::vector<Complex>> basis, std::size_t dim) {
    if (basis.empty()) {
        throw QcoreError("measurement basis is empty");
    }
    for (const auto &v : basis) {
        if (v.size() != dim) {
            throw QcoreError("measurement vector has wrong dimension");
        }
    }
}

/// Weight of the projection onto `vec` for every rest configuration.
template <typename Visit>
void for_each_projection(std::span<const Complex> amps, const Subsystem &sub, std::span<const Complex> vec,
                         Visit &&visit) {
    for (std::size_t base = 0; base < amps.size(); base++) {
        if (base & sub.mask) {
            continue;
        }
        Complex c = 0;
        for (std::size_t s = 0; s < sub.offsets.size(); s++) {
            c += std::conj(vec[s]) * amps[base | sub.offsets[s]];
        }
        visit(base, c);
    }
}

Amplitudes project_impl(std::span<const QubitLabel> labels, std::span<const Complex> amps, const Factor &onto) {
    Subsystem sub = locate(labels, onto.labels);
    Amplitudes out;
    for (std::size_t k = 0; k < labels.size(); k++) {
        if (!((sub.mask >> k) & 1)) {
            out.labels.push_back(labels[k]);
        }
    }
    out.amps.reserve(std::size_t{1} << out.labels.size());
    // Increasing bases with the subsystem bits cleared enumerate the
    // remaining labels in compressed index order.
    for_each_projection(amps, sub, onto.amps, [&](std::size_t, Complex c) { out.amps.push_back(c); });
    return out;
}

std::vector<std::vector<Complex>> bell_basis() {
    std::vector<std::vector<Complex>> basis;
    for (BellState b : kAllBellStates) {
        auto a = bell_amplitudes(b);
        basis.emplace_back(a.begin(), a.end());
    }
    return basis;
}

std::vector<std::vector<Complex>> single_basis(BasisChoice choice) {
    std::vector<std::vector<Complex>> basis;
    for (ClassicalBit bit : {ClassicalBit{0}, ClassicalBit{1}}) {
        auto a = basis_state(choice, bit);
        basis.emplace_back(a.begin(), a.end());
    }
    return basis;
}

}  // namespace

std::string_view name_of(BellState b) {
    switch (b) {
        case BellState::PhiPlus:
            return "phi+";
        case BellState::PhiMinus:
            return "phi-";
        case BellState::PsiPlus:
            return "psi+";
        case BellState::PsiMinus:
            return "psi-";
    }
    return "?";
}

std::string_view name_of(BasisChoice b) { return b == BasisChoice::Z ? "Z" : "X"; }

std::array<Complex, 4> bell_amplitudes(BellState b) {
    const double h = kInvSqrt2;
    switch (b) {
        case BellState::PhiPlus:
            return {h, 0, 0, h};
        case BellState::PhiMinus:
            return {h, 0, 0, -h};
        case BellState::PsiPlus:
            return {0, h, h, 0};
        case BellState::PsiMinus:
            // index 2 is first=0, second=1.
            return {0, -h, h, 0};
    }
    throw QcoreError("bad BellState");
}

std::array<Complex, 2> basis_state(BasisChoice basis, ClassicalBit bit) {
    if (bit > 1) {
        throw QcoreError("classical bit must be 0 or 1");
    }
    if (basis == BasisChoice::Z) {
        return bit == 0 ? std::array<Complex, 2>{1, 0} : std::array<Complex, 2>{0, 1};
    }
    return bit == 0 ? std::array<Complex, 2>{kInvSqrt2, kInvSqrt2} : std::array<Complex, 2>{kInvSqrt2, -kInvSqrt2};
}

Factor Factor::qubit(QubitLabel q, Complex a0, Complex a1) { return Factor{{std::move(q)}, {a0, a1}}; }

Factor Factor::basis(QubitLabel q, BasisChoice basis, ClassicalBit bit) {
    auto a = basis_state(basis, bit);
    return qubit(std::move(q), a[0], a[1]);
}

Factor Factor::bell(QubitLabel first, QubitLabel second, BellState b) {
    auto a = bell_amplitudes(b);
    return Factor{{std::move(first), std::move(second)}, {a.begin(), a.end()}};
}

Factor Factor::joint(std::vector<QubitLabel> labels, std::vector<Complex> amps) {
    if (amps.size() != (std::size_t{1} << labels.size())) {
        throw QcoreError("factor amplitude count does not match its labels");
    }
    return Factor{std::move(labels), std::move(amps)};
}

double Amplitudes::norm_squared() const { return squared_norm(amps); }

StateVector::StateVector(std::span<const Factor> factors) {
    if (factors.empty()) {
        throw QcoreError("a state needs at least one qubit");
    }
    amps_ = {Complex(1, 0)};
    for (const auto &f : factors) {
        append(f);
    }
}

bool StateVector::has(const QubitLabel &q) const { return std::find(labels_.begin(), labels_.end(), q) != labels_.end(); }

std::size_t StateVector::position(const QubitLabel &q) const { return position_in(labels_, q); }

void StateVector::append(const Factor &f) {
    if (f.labels.empty()) {
        throw QcoreError("factor has no qubits");
    }
    if (f.amps.size() != (std::size_t{1} << f.labels.size())) {
        throw QcoreError("factor amplitude count does not match its labels");
    }
    if (std::abs(squared_norm(f.amps) - 1.0) > kUnitTolerance) {
        throw QcoreError("factor is not a unit vector");
    }
    std::set<QubitLabel> seen(labels_.begin(), labels_.end());
    for (const auto &q : f.labels) {
        if (!seen.insert(q).second) {
            throw QcoreError("duplicate qubit label '" + q.name() + "'");
        }
    }
    if (labels_.size() + f.labels.size() > kMaxQubits) {
        throw QcoreError("register would exceed " + std::to_string(kMaxQubits) + " qubits");
    }
    std::vector<Complex> out(amps_.size() * f.amps.size());
    for (std::size_t hi = 0; hi < f.amps.size(); hi++) {
        for (std::size_t lo = 0; lo < amps_.size(); lo++) {
            out[lo + hi * amps_.size()] = amps_[lo] * f.amps[hi];
        }
    }
    amps_ = std::move(out);
    labels_.insert(labels_.end(), f.labels.begin(), f.labels.end());
}

double StateVector::norm_squared() const { return squared_norm(amps_); }

void StateVector::cnot(const QubitLabel &control, const QubitLabel &target) {
    std::size_t c = position(control);
    std::size_t t = position(target);
    if (c == t) {
        throw QcoreError("CNOT control and target must differ");
    }
    std::size_t cm = std::size_t{1} << c;
    std::size_t tm = std::size_t{1} << t;
    for (std::size_t i = 0; i < amps_.size(); i++) {
        if ((i & cm) && !(i & tm)) {
            std::swap(amps_[i], amps_[i | tm]);
        }
    }
}

void StateVector::isometry(const QubitLabel &target, std::span<const QubitLabel> ancillas,
                           std::span<const Complex> column0, std::span<const Complex> column1) {
    std::size_t t = position(target);
    std::size_t k = ancillas.size();
    std::size_t dim = std::size_t{2} << k;
    if (column0.size() != dim || column1.size() != dim) {
        throw QcoreError("isometry columns must span target and ancillas");
    }
    if (std::abs(squared_norm(column0) - 1.0) > kUnitTolerance ||
        std::abs(squared_norm(column1) - 1.0) > kUnitTolerance) {
        throw QcoreError("isometry columns must be unit vectors");
    }
    if (std::abs(inner(column0, column1)) > kUnitTolerance) {
        throw QcoreError("isometry columns are not orthogonal");
    }
    std::set<QubitLabel> seen(labels_.begin(), labels_.end());
    for (const auto &q : ancillas) {
        if (!seen.insert(q).second) {
            throw QcoreError("ancilla label '" + q.name() + "' is not fresh");
        }
    }
    std::size_t n = labels_.size();
    if (n + k > kMaxQubits) {
        throw QcoreError("register would exceed " + std::to_string(kMaxQubits) + " qubits");
    }
    std::size_t tm = std::size_t{1} << t;
    std::vector<Complex> out(amps_.size() << k);
    for (std::size_t i = 0; i < amps_.size(); i++) {
        if (amps_[i] == Complex(0)) {
            continue;
        }
        auto col = (i & tm) ? column1 : column0;
        std::size_t base = i & ~tm;
        for (std::size_t j = 0; j < dim; j++) {
            std::size_t idx = base | ((j & 1) << t) | ((j >> 1) << n);
            out[idx] += amps_[i] * col[j];
        }
    }
    amps_ = std::move(out);
    labels_.insert(labels_.end(), ancillas.begin(), ancillas.end());
}

std::vector<double> StateVector::probabilities(std::span<const QubitLabel> labels,
                                               std::span<const std::vector<Complex>> basis) const {
    Subsystem sub = locate(labels_, labels);
    check_basis(basis, sub.offsets.size());
    std::vector<double> probs;
    probs.reserve(basis.size());
    for (const auto &vec : basis) {
        double p = 0;
        for_each_projection(amps_, sub, vec, [&](std::size_t, Complex c) { p += std::norm(c); });
        probs.push_back(p);
    }
    return probs;
}

std::size_t StateVector::measure(std::span<const QubitLabel> labels, std::span<const std::vector<Complex>> basis,
                                 RandomSource &rng) {
    auto probs = probabilities(labels, basis);
    double total = 0;
    for (double p : probs) {
        total += p;
    }
    double u = rng.uniform() * total;
    std::size_t outcome = probs.size() - 1;
    double acc = 0;
    for (std::size_t k = 0; k < probs.size(); k++) {
        acc += probs[k];
        if (u < acc && probs[k] > 0) {
            outcome = k;
            break;
        }
    }
    while (probs[outcome] <= 0 && outcome > 0) {
        outcome--;
    }
    if (probs[outcome] <= 0) {
        throw QcoreError("measurement has no outcome with positive probability");
    }

    Subsystem sub = locate(labels_, labels);
    const auto &vec = basis[outcome];
    double scale = 1.0 / std::sqrt(probs[outcome]);
    for_each_projection(amps_, sub, vec, [&](std::size_t base, Complex c) {
        for (std::size_t s = 0; s < sub.offsets.size(); s++) {
            amps_[base | sub.offsets[s]] = c * vec[s] * scale;
        }
    });
    return outcome;
}

StateVector make_state(std::span<const Factor> factors) { return StateVector(factors); }

StateVector apply_cnot(StateVector state, const QubitLabel &control, const QubitLabel &target) {
    state.cnot(control, target);
    return state;
}

StateVector apply_isometry(StateVector state, const QubitLabel &target, std::span<const QubitLabel> ancillas,
                           std::span<const Complex> column0, std::span<const Complex> column1) {
    state.isometry(target, ancillas, column0, column1);
    return state;
}

Measured<BellState> measure_bell(StateVector state, const QubitLabel &q1, const QubitLabel &q2, RandomSource &rng) {
    static const auto basis = bell_basis();
    std::array<QubitLabel, 2> pair = {q1, q2};
    std::size_t k = state.measure(pair, basis, rng);
    return {kAllBellStates[k], std::move(state)};
}

Measured<ClassicalBit> measure_single(StateVector state, const QubitLabel &q, BasisChoice basis, RandomSource &rng) {
    static const auto z = single_basis(BasisChoice::Z);
    static const auto x = single_basis(BasisChoice::X);
    std::array<QubitLabel, 1> one = {q};
    std::size_t k = state.measure(one, basis == BasisChoice::Z ? z : x, rng);
    return {static_cast<ClassicalBit>(k), std::move(state)};
}

std::array<double, 4> bell_probabilities(const StateVector &state, const QubitLabel &q1, const QubitLabel &q2) {
    static const auto basis = bell_basis();
    std::array<QubitLabel, 2> pair = {q1, q2};
    auto p = state.probabilities(pair, basis);
    return {p[0], p[1], p[2], p[3]};
}

Amplitudes project(const StateVector &state, const Factor &onto) {
    return project_impl(state.labels_, state.amps_, onto);
}

Amplitudes project(const Amplitudes &state, const Factor &onto) { return project_impl(state.labels, state.amps, onto); }

Complex amplitude_of(const StateVector &state, std::span<const Factor> assignment) {
    std::size_t covered = 0;
    for (const auto &f : assignment) {
        covered += f.labels.size();
    }
    if (covered != state.num_qubits()) {
        throw QcoreError("assignment must cover every qubit exactly once");
    }
    if (assignment.empty()) {
        return state.amplitudes()[0];
    }
    Amplitudes rest = project(state, assignment[0]);
    for (std::size_t k = 1; k < assignment.size(); k++) {
        rest = project(rest, assignment[k]);
    }
    if (!rest.labels.empty() || rest.amps.size() != 1) {
        throw QcoreError("assignment must cover every qubit exactly once");
    }
    return rest.amps[0];
}

Complex amplitude_of(const StateVector &state, std::initializer_list<Factor> assignment) {
    return amplitude_of(state, std::span<const Factor>(assignment.begin(), assignment.size()));
}

}  // namespace cqka
