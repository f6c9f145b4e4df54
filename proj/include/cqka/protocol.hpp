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

#ifndef CQKA_PROTOCOL_HPP
#define CQKA_PROTOCOL_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqka/qcore.hpp"
#include "cqka/random.hpp"

namespace cqka {

/// Two classical bits; the private record of a Bell outcome.
struct TwoBit {
    ClassicalBit hi = 0;
    ClassicalBit lo = 0;

    friend bool operator==(const TwoBit &, const TwoBit &) = default;
    friend TwoBit operator^(TwoBit a, TwoBit b) {
        return {static_cast<ClassicalBit>(a.hi ^ b.hi), static_cast<ClassicalBit>(a.lo ^ b.lo)};
    }
    std::string str() const { return {char('0' + hi), char('0' + lo)}; }
};

/// phi+ -> 00, phi- -> 01, psi+ -> 10, psi- -> 11.
TwoBit encode_outcome(BellState b);
BellState decode_outcome(TwoBit r);

/// Charlie's map: phi+ <-> 0, phi- <-> 1.
ClassicalBit charlie_bit(BellState b);
BellState charlie_state(ClassicalBit k);

/// Bob's announcement: phi+, psi- -> 0; phi-, psi+ -> 1.
ClassicalBit bob_announce_bit(BellState outcome);

/// K = parity of r_A xor r_B.
ClassicalBit final_key_bit(TwoBit r_a, TwoBit r_b);

// ---------------------------------------------------------------------------
// Correlation tables

/// The three independent per-bit choices: Charlie's Bell state (as k_C),
/// Alice's prepared bit, and Bob's prepared bit.
struct Preparation {
    ClassicalBit charlie = 0;
    ClassicalBit alice = 0;
    ClassicalBit bob = 0;

    friend bool operator==(const Preparation &, const Preparation &) = default;
};

/// All eight preparations, Charlie-major then Alice then Bob.
std::array<Preparation, 8> all_preparations();

struct ExpectedTerm {
    BellState alice;
    BellState bob;
    int sign;  // coefficient is sign / sqrt(2)
};

/// Bell-pair expansion of CNOT(2->1) CNOT(3->4) |a>_1 |charlie>_23 |b>_4
/// for the honest protocol. Exactly two terms.
std::array<ExpectedTerm, 2> expected_terms(const Preparation &prep);

/// Whether the joint outcome appears in the expansion; anything else is a
/// detection event.
bool is_expected_outcome(const Preparation &prep, BellState alice, BellState bob);

struct KeyTableRow {
    ClassicalBit k_c;
    ClassicalBit k_a;
    ClassicalBit k_b;
    TwoBit r_a;
    TwoBit r_b;
    ClassicalBit key;
};

/// Announcement/outcome table for the controlled protocol (16 rows).
std::span<const KeyTableRow> controlled_key_table();
/// Table for the two-party protocol, where k_C is implicitly k_A (8 rows).
std::span<const KeyTableRow> two_party_key_table();

enum class Role { Alice, Bob };

/// The counterpart's outcome implied by the announcements and the caller's
/// own outcome. nullopt when no table row matches; callers must treat that
/// as a reconciliation failure.
std::optional<TwoBit> infer_counterpart(ClassicalBit k_c, ClassicalBit k_a, ClassicalBit k_b, TwoBit own, Role role);
std::optional<TwoBit> infer_counterpart_two_party(ClassicalBit k_a, ClassicalBit k_b, TwoBit own, Role role);

// ---------------------------------------------------------------------------
// Decoys

struct DecoySpec {
    std::size_t position;
    BasisChoice basis;
    ClassicalBit bit;
};

/// A receiver's measurement of one decoy, in the announced basis.
struct DecoyReading {
    std::size_t position;
    BasisChoice basis;
    ClassicalBit bit;
};

struct DecoyCheck {
    double error_rate = 0;
    bool pass = true;
};

/// p decoys at distinct uniform positions among seq_len + p slots, sorted by position.
std::vector<DecoySpec> insert_decoys(std::size_t seq_len, std::size_t p, RandomSource &rng);

/// Throws if readings and specs are not aligned position by position.
DecoyCheck verify_decoys(std::span<const DecoyReading> measured, std::span<const DecoySpec> specs, double tolerance);

// ---------------------------------------------------------------------------
// Extension points

/// Adversary hook on a quantum channel, invoked for every qubit in flight
/// (signal and decoy alike). It may act on any qubit of the register and
/// append ancillas. A tap instance belongs to one session.
class ChannelTap {
  public:
    virtual ~ChannelTap() = default;
    virtual void intercept(StateVector &reg, const QubitLabel &in_flight, RandomSource &rng) = 0;
};

/// What a replacement two-qubit source hands out for one key bit.
struct SourceEmission {
    Factor pair;  // over labels "2" and "3"
    ClassicalBit announced;
};

/// Replaces Charlie's Bell-pair source.
class PairSource {
  public:
    virtual ~PairSource() = default;
    virtual SourceEmission emit(std::size_t index, std::optional<ClassicalBit> forced_announcement,
                                RandomSource &rng) = 0;
};

/// Public data for one key bit, visible after all announcements.
struct RoundView {
    std::size_t index;
    ClassicalBit k_c;
    ClassicalBit k_a;
    ClassicalBit k_b;
};

/// Called once per key bit after the announcements, with the residual
/// register (honest qubits already collapsed). This is where an eavesdropper
/// holding ancillas measures them.
class RegisterObserver {
  public:
    virtual ~RegisterObserver() = default;
    virtual void observe(const RoundView &view, StateVector &reg, RandomSource &rng) = 0;
};

// ---------------------------------------------------------------------------
// Announcements

enum class Party { Charlie, Alice, Bob };
std::string_view name_of(Party p);

struct Announcement {
    Party who;
    std::vector<ClassicalBit> bits;
    int round;
};

/// Authenticated public channel. Enforces that Charlie announces k_C before
/// Alice and Bob announce in the controlled protocol.
class PublicBoard {
  public:
    explicit PublicBoard(int protocol) : protocol_(protocol) {}

    void announce_controller(std::vector<ClassicalBit> k_c);
    void announce_participants(std::vector<ClassicalBit> k_a, std::vector<ClassicalBit> k_b);

    const std::vector<Announcement> &entries() const { return entries_; }
    int protocol() const { return protocol_; }

  private:
    int protocol_;
    std::vector<Announcement> entries_;
};

// ---------------------------------------------------------------------------
// Sessions

struct Forcing {
    std::optional<ClassicalBit> alice;
    std::optional<ClassicalBit> bob;
    std::optional<ClassicalBit> charlie;  // k_C, i.e. phi+ for 0
};

struct SessionOptions {
    std::size_t n = 1;
    /// Decoys per channel; defaults to n.
    std::optional<std::size_t> p;
    double tolerance = 0.10;
    /// Fraction of key bits compared publicly after reconciliation.
    double spot_check_fraction = 0.2;

    ChannelTap *tap_ca = nullptr;
    ChannelTap *tap_cb = nullptr;
    ChannelTap *tap_ab = nullptr;  // two-party protocol only
    PairSource *source = nullptr;  // controlled protocol only
    RegisterObserver *observer = nullptr;
    Forcing forcing;
};

struct SessionTranscript {
    int protocol = 1;
    std::size_t n = 0;
    std::size_t p = 0;
    double tolerance = 0;

    std::vector<BellState> charlie_states;  // as prepared (honest) or as announced
    std::vector<ClassicalBit> k_c;
    std::vector<ClassicalBit> k_a;
    std::vector<ClassicalBit> bob_prepared;
    std::vector<ClassicalBit> k_b;
    std::vector<TwoBit> r_a;
    std::vector<TwoBit> r_b;

    std::vector<DecoySpec> decoys_first;   // CA, or AB for the two-party protocol
    std::vector<DecoySpec> decoys_second;  // CB; empty for the two-party protocol
    double decoy_error_rate = 0;           // over all decoys
    double decoy_error_first = 0;
    double decoy_error_second = 0;

    PublicBoard board{1};

    std::vector<std::size_t> spot_check_positions;
    double spot_check_mismatch = 0;

    bool aborted = false;
    std::string abort_reason;

    /// Keys each side derived, kept even when the session aborts later.
    std::vector<ClassicalBit> raw_key_alice;
    std::vector<ClassicalBit> raw_key_bob;
    /// Accepted keys; empty when aborted.
    std::vector<ClassicalBit> final_key_alice;
    std::vector<ClassicalBit> final_key_bob;

    Preparation preparation(std::size_t i) const;
    /// Joint outcome of bit i absent from the honest expansion.
    bool detected(std::size_t i) const;
};

/// Charlie's n Bell states and the matching k_C.
struct CharliePreparation {
    std::vector<BellState> states;
    std::vector<ClassicalBit> k_c;
};
CharliePreparation charlie_prepare(std::size_t n, RandomSource &rng);

struct ParticipantResult {
    TwoBit r;
    BellState outcome;
};

/// Prepares |own_bit> on `own`, applies CNOT(received -> own), and Bell-measures
/// (own, received).
ParticipantResult participant_encode_measure(StateVector &reg, const QubitLabel &received, const QubitLabel &own,
                                             ClassicalBit own_bit, RandomSource &rng);

SessionTranscript run_protocol1(const SessionOptions &options, RandomSource &rng);
SessionTranscript run_protocol2(const SessionOptions &options, RandomSource &rng);

/// JSON object for one transcript (single line).
std::string transcript_to_json(const SessionTranscript &t);
std::string bits_to_string(std::span<const ClassicalBit> bits);

}  // namespace cqka

#endif  // CQKA_PROTOCOL_HPP
