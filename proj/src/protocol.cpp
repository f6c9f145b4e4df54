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

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cqka {

namespace {

using B = BellState;

constexpr TwoBit tb(int hi, int lo) { return TwoBit{ClassicalBit(hi), ClassicalBit(lo)}; }

constexpr KeyTableRow row(int kc, int ka, int kb, TwoBit ra, TwoBit rb, int key) {
    return KeyTableRow{ClassicalBit(kc), ClassicalBit(ka), ClassicalBit(kb), ra, rb, ClassicalBit(key)};
}

// k_C is constant within each block of eight.
constexpr std::array<KeyTableRow, 16> kControlledTable = {{
    row(0, 0, 0, tb(0, 0), tb(0, 0), 0),
    row(0, 0, 1, tb(0, 1), tb(0, 1), 0),
    row(0, 0, 1, tb(0, 0), tb(1, 0), 1),
    row(0, 0, 0, tb(0, 1), tb(1, 1), 1),
    row(0, 1, 0, tb(1, 0), tb(0, 0), 1),
    row(0, 1, 1, tb(1, 1), tb(0, 1), 1),
    row(0, 1, 1, tb(1, 0), tb(1, 0), 0),
    row(0, 1, 0, tb(1, 1), tb(1, 1), 0),
    row(1, 0, 1, tb(0, 0), tb(0, 1), 1),
    row(1, 0, 0, tb(0, 1), tb(0, 0), 1),
    row(1, 0, 0, tb(0, 0), tb(1, 1), 0),
    row(1, 0, 1, tb(0, 1), tb(1, 0), 0),
    row(1, 1, 1, tb(1, 0), tb(0, 1), 0),
    row(1, 1, 0, tb(1, 1), tb(0, 0), 0),
    row(1, 1, 0, tb(1, 0), tb(1, 1), 1),
    row(1, 1, 1, tb(1, 1), tb(1, 0), 1),
}};

constexpr std::array<KeyTableRow, 8> kTwoPartyTable = {{
    row(0, 0, 0, tb(0, 0), tb(0, 0), 0),
    row(0, 0, 1, tb(0, 1), tb(0, 1), 0),
    row(0, 0, 1, tb(0, 0), tb(1, 0), 1),
    row(0, 0, 0, tb(0, 1), tb(1, 1), 1),
    row(1, 1, 1, tb(1, 0), tb(0, 1), 0),
    row(1, 1, 0, tb(1, 1), tb(0, 0), 0),
    row(1, 1, 0, tb(1, 0), tb(1, 1), 1),
    row(1, 1, 1, tb(1, 1), tb(1, 0), 1),
}};

// Indexed by charlie*4 + alice*2 + bob.
constexpr std::array<std::array<ExpectedTerm, 2>, 8> kExpected = {{
    {{{B::PhiPlus, B::PhiPlus, +1}, {B::PhiMinus, B::PhiMinus, +1}}},
    {{{B::PhiPlus, B::PsiPlus, +1}, {B::PhiMinus, B::PsiMinus, +1}}},
    {{{B::PsiPlus, B::PhiPlus, +1}, {B::PsiMinus, B::PhiMinus, -1}}},
    {{{B::PsiPlus, B::PsiPlus, +1}, {B::PsiMinus, B::PsiMinus, -1}}},
    {{{B::PhiPlus, B::PhiMinus, +1}, {B::PhiMinus, B::PhiPlus, +1}}},
    {{{B::PhiPlus, B::PsiMinus, +1}, {B::PhiMinus, B::PsiPlus, +1}}},
    {{{B::PsiPlus, B::PhiMinus, +1}, {B::PsiMinus, B::PhiPlus, -1}}},
    {{{B::PsiPlus, B::PsiMinus, +1}, {B::PsiMinus, B::PsiPlus, -1}}},
}};

void check_bit(ClassicalBit b, const char *what) {
    if (b > 1) {
        throw QcoreError(std::string(what) + " must be 0 or 1");
    }
}

std::optional<TwoBit> lookup(std::span<const KeyTableRow> table, ClassicalBit k_c, ClassicalBit k_a,
                             ClassicalBit k_b, TwoBit own, Role role) {
    for (const auto &r : table) {
        if (r.k_c != k_c || r.k_a != k_a || r.k_b != k_b) {
            continue;
        }
        if (role == Role::Alice && r.r_a == own) {
            return r.r_b;
        }
        if (role == Role::Bob && r.r_b == own) {
            return r.r_a;
        }
    }
    return std::nullopt;
}

ClassicalBit pick(const std::optional<ClassicalBit> &forced, RandomSource &rng) {
    return forced ? *forced : ClassicalBit(rng.coin());
}

/// Sends every slot of an enlarged sequence through `tap` and returns the
/// receiver's decoy readings. Signal slots map to `signal` of register i.
std::vector<DecoyReading> transmit(std::vector<StateVector> &registers, const QubitLabel &signal,
                                   std::span<const DecoySpec> decoys, ChannelTap *tap, RandomSource &rng) {
    std::vector<DecoyReading> readings;
    readings.reserve(decoys.size());
    std::size_t total = registers.size() + decoys.size();
    std::size_t next_decoy = 0;
    std::size_t next_signal = 0;
    for (std::size_t slot = 0; slot < total; slot++) {
        if (next_decoy < decoys.size() && decoys[next_decoy].position == slot) {
            const auto &d = decoys[next_decoy++];
            StateVector reg{Factor::basis("decoy", d.basis, d.bit)};
            if (tap) {
                tap->intercept(reg, "decoy", rng);
            }
            auto m = measure_single(std::move(reg), "decoy", d.basis, rng);
            readings.push_back({d.position, d.basis, m.outcome});
        } else {
            if (tap) {
                tap->intercept(registers[next_signal], signal, rng);
            }
            next_signal++;
        }
    }
    return readings;
}

void validate(const SessionOptions &o) {
    if (o.n == 0) {
        throw QcoreError("key length n must be at least 1");
    }
    if (!(o.tolerance >= 0 && o.tolerance <= 1)) {
        throw QcoreError("tolerance must lie in [0, 1]");
    }
    if (!(o.spot_check_fraction >= 0 && o.spot_check_fraction <= 1)) {
        throw QcoreError("spot-check fraction must lie in [0, 1]");
    }
    for (const auto &f : {o.forcing.alice, o.forcing.bob, o.forcing.charlie}) {
        if (f) {
            check_bit(*f, "forced bit");
        }
    }
}

/// Spot check of Step 9 and key acceptance. Keys keep their full length;
/// the compared positions are public but not removed.
void accept_keys(SessionTranscript &t, double fraction, RandomSource &rng) {
    std::size_t n = t.raw_key_alice.size();
    std::size_t m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    m = std::min(m, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < m; k++) {
        std::size_t j = k + rng.below(n - k);
        std::swap(order[k], order[j]);
    }
    t.spot_check_positions.assign(order.begin(), order.begin() + m);
    std::sort(t.spot_check_positions.begin(), t.spot_check_positions.end());
    std::size_t mismatches = 0;
    for (std::size_t pos : t.spot_check_positions) {
        mismatches += t.raw_key_alice[pos] != t.raw_key_bob[pos];
    }
    t.spot_check_mismatch = m == 0 ? 0.0 : static_cast<double>(mismatches) / static_cast<double>(m);
    if (t.spot_check_mismatch > t.tolerance) {
        t.aborted = true;
        t.abort_reason = "spot check mismatch above tolerance";
        return;
    }
    t.final_key_alice = t.raw_key_alice;
    t.final_key_bob = t.raw_key_bob;
}

}  // namespace

TwoBit encode_outcome(BellState b) {
    auto v = static_cast<int>(b);
    return tb(v >> 1, v & 1);
}

BellState decode_outcome(TwoBit r) {
    check_bit(r.hi, "outcome bit");
    check_bit(r.lo, "outcome bit");
    return kAllBellStates[r.hi * 2 + r.lo];
}

ClassicalBit charlie_bit(BellState b) {
    if (b == BellState::PhiPlus) {
        return 0;
    }
    if (b == BellState::PhiMinus) {
        return 1;
    }
    throw QcoreError("Charlie only prepares phi+ or phi-");
}

BellState charlie_state(ClassicalBit k) {
    check_bit(k, "k_C");
    return k == 0 ? BellState::PhiPlus : BellState::PhiMinus;
}

ClassicalBit bob_announce_bit(BellState outcome) {
    return (outcome == BellState::PhiMinus || outcome == BellState::PsiPlus) ? 1 : 0;
}

ClassicalBit final_key_bit(TwoBit r_a, TwoBit r_b) {
    TwoBit x = r_a ^ r_b;
    return static_cast<ClassicalBit>(x.hi ^ x.lo);
}

std::array<Preparation, 8> all_preparations() {
    std::array<Preparation, 8> out;
    for (int i = 0; i < 8; i++) {
        out[i] = Preparation{ClassicalBit((i >> 2) & 1), ClassicalBit((i >> 1) & 1), ClassicalBit(i & 1)};
    }
    return out;
}

std::array<ExpectedTerm, 2> expected_terms(const Preparation &prep) {
    check_bit(prep.charlie, "k_C");
    check_bit(prep.alice, "Alice's bit");
    check_bit(prep.bob, "Bob's bit");
    return kExpected[prep.charlie * 4 + prep.alice * 2 + prep.bob];
}

bool is_expected_outcome(const Preparation &prep, BellState alice, BellState bob) {
    for (const auto &t : expected_terms(prep)) {
        if (t.alice == alice && t.bob == bob) {
            return true;
        }
    }
    return false;
}

std::span<const KeyTableRow> controlled_key_table() { return kControlledTable; }
std::span<const KeyTableRow> two_party_key_table() { return kTwoPartyTable; }

std::optional<TwoBit> infer_counterpart(ClassicalBit k_c, ClassicalBit k_a, ClassicalBit k_b, TwoBit own, Role role) {
    return lookup(kControlledTable, k_c, k_a, k_b, own, role);
}

std::optional<TwoBit> infer_counterpart_two_party(ClassicalBit k_a, ClassicalBit k_b, TwoBit own, Role role) {
    return lookup(kTwoPartyTable, k_a, k_a, k_b, own, role);
}

std::vector<DecoySpec> insert_decoys(std::size_t seq_len, std::size_t p, RandomSource &rng) {
    std::size_t slots = seq_len + p;
    // Partial Fisher-Yates over slot indices picks p distinct positions.
    std::vector<std::size_t> idx(slots);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<DecoySpec> out;
    out.reserve(p);
    for (std::size_t k = 0; k < p; k++) {
        std::size_t j = k + rng.below(slots - k);
        std::swap(idx[k], idx[j]);
    }
    for (std::size_t k = 0; k < p; k++) {
        BasisChoice basis = rng.coin() ? BasisChoice::X : BasisChoice::Z;
        out.push_back({idx[k], basis, ClassicalBit(rng.coin())});
    }
    std::sort(out.begin(), out.end(), [](const DecoySpec &a, const DecoySpec &b) { return a.position < b.position; });
    return out;
}

DecoyCheck verify_decoys(std::span<const DecoyReading> measured, std::span<const DecoySpec> specs, double tolerance) {
    if (measured.size() != specs.size()) {
        throw QcoreError("decoy readings do not match the announced decoys");
    }
    std::size_t errors = 0;
    for (std::size_t k = 0; k < specs.size(); k++) {
        if (measured[k].position != specs[k].position || measured[k].basis != specs[k].basis) {
            throw QcoreError("decoy reading at slot " + std::to_string(measured[k].position) +
                             " does not match the announced position or basis");
        }
        errors += measured[k].bit != specs[k].bit;
    }
    DecoyCheck c;
    c.error_rate = specs.empty() ? 0.0 : static_cast<double>(errors) / static_cast<double>(specs.size());
    c.pass = c.error_rate <= tolerance;
    return c;
}

std::string_view name_of(Party p) {
    switch (p) {
        case Party::Charlie:
            return "charlie";
        case Party::Alice:
            return "alice";
        case Party::Bob:
            return "bob";
    }
    return "?";
}

void PublicBoard::announce_controller(std::vector<ClassicalBit> k_c) {
    if (protocol_ != 1) {
        throw QcoreError("the two-party protocol has no controller announcement");
    }
    if (!entries_.empty()) {
        throw QcoreError("Charlie's announcement must come first and only once");
    }
    entries_.push_back({Party::Charlie, std::move(k_c), 1});
}

void PublicBoard::announce_participants(std::vector<ClassicalBit> k_a, std::vector<ClassicalBit> k_b) {
    int expected_before = protocol_ == 1 ? 1 : 0;
    if (static_cast<int>(entries_.size()) != expected_before) {
        throw QcoreError(protocol_ == 1 ? "Alice and Bob announce only after Charlie"
                                        : "participants announce exactly once");
    }
    if (k_a.size() != k_b.size()) {
        throw QcoreError("k_A and k_B lengths differ");
    }
    int round = expected_before + 1;
    entries_.push_back({Party::Alice, std::move(k_a), round});
    entries_.push_back({Party::Bob, std::move(k_b), round});
}

Preparation SessionTranscript::preparation(std::size_t i) const { return {k_c.at(i), k_a.at(i), bob_prepared.at(i)}; }

bool SessionTranscript::detected(std::size_t i) const {
    return !is_expected_outcome(preparation(i), decode_outcome(r_a.at(i)), decode_outcome(r_b.at(i)));
}

CharliePreparation charlie_prepare(std::size_t n, RandomSource &rng) {
    if (n == 0) {
        throw QcoreError("Charlie must prepare at least one Bell state");
    }
    CharliePreparation out;
    out.states.reserve(n);
    out.k_c.reserve(n);
    for (std::size_t i = 0; i < n; i++) {
        ClassicalBit k = rng.coin();
        out.k_c.push_back(k);
        out.states.push_back(charlie_state(k));
    }
    return out;
}

ParticipantResult participant_encode_measure(StateVector &reg, const QubitLabel &received, const QubitLabel &own,
                                             ClassicalBit own_bit, RandomSource &rng) {
    check_bit(own_bit, "prepared bit");
    reg.append(Factor::basis(own, BasisChoice::Z, own_bit));
    reg.cnot(received, own);
    auto m = measure_bell(std::move(reg), own, received, rng);
    reg = std::move(m.state);
    return {encode_outcome(m.outcome), m.outcome};
}

SessionTranscript run_protocol1(const SessionOptions &o, RandomSource &rng) {
    validate(o);
    SessionTranscript t;
    t.protocol = 1;
    t.n = o.n;
    t.p = o.p.value_or(o.n);
    t.tolerance = o.tolerance;
    t.board = PublicBoard(1);

    // Step 1: Bell pairs (or the impersonator's pairs) on qubits 2 and 3.
    std::vector<StateVector> regs;
    regs.reserve(o.n);
    for (std::size_t i = 0; i < o.n; i++) {
        if (o.source) {
            auto e = o.source->emit(i, o.forcing.charlie, rng);
            check_bit(e.announced, "announced k_C");
            t.k_c.push_back(e.announced);
            t.charlie_states.push_back(charlie_state(e.announced));
            regs.emplace_back(std::initializer_list<Factor>{e.pair});
        } else {
            ClassicalBit k = pick(o.forcing.charlie, rng);
            t.k_c.push_back(k);
            t.charlie_states.push_back(charlie_state(k));
            regs.emplace_back(std::initializer_list<Factor>{Factor::bell("2", "3", charlie_state(k))});
        }
    }

    // Steps 2-3: decoys on both channels, transmission, verification.
    t.decoys_first = insert_decoys(o.n, t.p, rng);
    t.decoys_second = insert_decoys(o.n, t.p, rng);
    auto read_ca = transmit(regs, "2", t.decoys_first, o.tap_ca, rng);
    auto read_cb = transmit(regs, "3", t.decoys_second, o.tap_cb, rng);
    auto check_ca = verify_decoys(read_ca, t.decoys_first, o.tolerance);
    auto check_cb = verify_decoys(read_cb, t.decoys_second, o.tolerance);
    t.decoy_error_first = check_ca.error_rate;
    t.decoy_error_second = check_cb.error_rate;
    t.decoy_error_rate = t.p == 0 ? 0.0 : (check_ca.error_rate + check_cb.error_rate) / 2.0;
    if (!check_ca.pass || !check_cb.pass) {
        t.aborted = true;
        t.abort_reason = !check_ca.pass ? "decoy error above tolerance on CA channel"
                                        : "decoy error above tolerance on CB channel";
        return t;
    }

    // Steps 4-6: single-qubit preparation, CNOT, Bell measurement.
    for (std::size_t i = 0; i < o.n; i++) {
        ClassicalBit a = pick(o.forcing.alice, rng);
        ClassicalBit b = pick(o.forcing.bob, rng);
        t.k_a.push_back(a);
        t.bob_prepared.push_back(b);
        auto alice = participant_encode_measure(regs[i], "2", "1", a, rng);
        auto bob = participant_encode_measure(regs[i], "3", "4", b, rng);
        t.r_a.push_back(alice.r);
        t.r_b.push_back(bob.r);
        t.k_b.push_back(bob_announce_bit(bob.outcome));
    }

    // Steps 7-8: Charlie first, then Alice and Bob.
    t.board.announce_controller(t.k_c);
    t.board.announce_participants(t.k_a, t.k_b);

    if (o.observer) {
        for (std::size_t i = 0; i < o.n; i++) {
            o.observer->observe(RoundView{i, t.k_c[i], t.k_a[i], t.k_b[i]}, regs[i], rng);
        }
    }

    // Step 9: each side infers the other's outcome and derives K.
    bool consistent = true;
    for (std::size_t i = 0; i < o.n; i++) {
        auto rb_guess = infer_counterpart(t.k_c[i], t.k_a[i], t.k_b[i], t.r_a[i], Role::Alice);
        auto ra_guess = infer_counterpart(t.k_c[i], t.k_a[i], t.k_b[i], t.r_b[i], Role::Bob);
        if (!rb_guess || !ra_guess) {
            consistent = false;
            t.raw_key_alice.push_back(rb_guess ? final_key_bit(t.r_a[i], *rb_guess) : 0);
            t.raw_key_bob.push_back(ra_guess ? final_key_bit(*ra_guess, t.r_b[i]) : 0);
            continue;
        }
        t.raw_key_alice.push_back(final_key_bit(t.r_a[i], *rb_guess));
        t.raw_key_bob.push_back(final_key_bit(*ra_guess, t.r_b[i]));
    }
    if (!consistent) {
        t.aborted = true;
        t.abort_reason = "announcements inconsistent with a measured outcome";
        return t;
    }
    accept_keys(t, o.spot_check_fraction, rng);
    return t;
}

SessionTranscript run_protocol2(const SessionOptions &o, RandomSource &rng) {
    validate(o);
    if (o.source || o.forcing.charlie || o.tap_ca || o.tap_cb) {
        throw QcoreError("the two-party protocol has no controller or CA/CB channels");
    }
    SessionTranscript t;
    t.protocol = 2;
    t.n = o.n;
    t.p = o.p.value_or(o.n);
    t.tolerance = o.tolerance;
    t.board = PublicBoard(2);

    // Step 1: Alice's Bell pair and her single qubit share one bit.
    std::vector<StateVector> regs;
    regs.reserve(o.n);
    for (std::size_t i = 0; i < o.n; i++) {
        ClassicalBit x = pick(o.forcing.alice, rng);
        t.k_c.push_back(x);
        t.k_a.push_back(x);
        t.charlie_states.push_back(charlie_state(x));
        regs.emplace_back(std::initializer_list<Factor>{Factor::bell("2", "3", charlie_state(x))});
    }

    // Step 2: qubit 3 travels to Bob, with decoys.
    t.decoys_first = insert_decoys(o.n, t.p, rng);
    auto reads = transmit(regs, "3", t.decoys_first, o.tap_ab, rng);
    auto check = verify_decoys(reads, t.decoys_first, o.tolerance);
    t.decoy_error_first = check.error_rate;
    t.decoy_error_rate = check.error_rate;
    if (!check.pass) {
        t.aborted = true;
        t.abort_reason = "decoy error above tolerance on AB channel";
        return t;
    }

    // Steps 3-5.
    for (std::size_t i = 0; i < o.n; i++) {
        ClassicalBit b = pick(o.forcing.bob, rng);
        t.bob_prepared.push_back(b);
        auto alice = participant_encode_measure(regs[i], "2", "1", t.k_a[i], rng);
        auto bob = participant_encode_measure(regs[i], "3", "4", b, rng);
        t.r_a.push_back(alice.r);
        t.r_b.push_back(bob.r);
        t.k_b.push_back(bob_announce_bit(bob.outcome));
    }

    // Step 6.
    t.board.announce_participants(t.k_a, t.k_b);
    if (o.observer) {
        for (std::size_t i = 0; i < o.n; i++) {
            o.observer->observe(RoundView{i, t.k_c[i], t.k_a[i], t.k_b[i]}, regs[i], rng);
        }
    }

    // Step 7.
    bool consistent = true;
    for (std::size_t i = 0; i < o.n; i++) {
        auto rb_guess = infer_counterpart_two_party(t.k_a[i], t.k_b[i], t.r_a[i], Role::Alice);
        auto ra_guess = infer_counterpart_two_party(t.k_a[i], t.k_b[i], t.r_b[i], Role::Bob);
        consistent = consistent && rb_guess && ra_guess;
        t.raw_key_alice.push_back(rb_guess ? final_key_bit(t.r_a[i], *rb_guess) : 0);
        t.raw_key_bob.push_back(ra_guess ? final_key_bit(*ra_guess, t.r_b[i]) : 0);
    }
    if (!consistent) {
        t.aborted = true;
        t.abort_reason = "announcements inconsistent with a measured outcome";
        return t;
    }
    accept_keys(t, o.spot_check_fraction, rng);
    return t;
}

std::string bits_to_string(std::span<const ClassicalBit> bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) {
        s.push_back(static_cast<char>('0' + b));
    }
    return s;
}

}  // namespace cqka
