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

#ifndef CQKA_ADVERSARY_HPP
#define CQKA_ADVERSARY_HPP

#include <array>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "cqka/protocol.hpp"
#include "cqka/qcore.hpp"

namespace cqka {

inline constexpr double kHalfPi = 1.57079632679489661923;

// ---------------------------------------------------------------------------
// Parameters

/// Eve's substitute two-qubit state a|00> + b|01> + c|10> + d|11> on (2, 3).
struct ImpersonationParams {
    Complex a{kInvSqrt2, 0};
    Complex b{0, 0};
    Complex c{0, 0};
    Complex d{kInvSqrt2, 0};

    /// Throws unless |a|^2 + |b|^2 + |c|^2 + |d|^2 = 1 within 1e-12.
    void validate() const;
};

/// Entangling parameters for the two channel isometries. The zeta side acts
/// on the qubit sent to Alice, the eta side on the qubit sent to Bob.
struct CollectiveParams {
    double A_zeta = 1;
    double B_zeta = 0;
    double A_eta = 1;
    double B_eta = 0;
    double alpha_zeta = kHalfPi;
    double beta_zeta = kHalfPi;
    double alpha_eta = kHalfPi;
    double beta_eta = kHalfPi;
    /// Eve's prior that the key bit is 0.
    double e = 0.5;

    /// A = 1 on both channels with both alpha angles equal.
    static CollectiveParams symmetric(double alpha);

    void validate() const;
};

struct NoAttack {};
struct InterceptResend {};

using AttackStrategy = std::variant<NoAttack, ImpersonationParams, CollectiveParams, InterceptResend>;

std::string attack_name(const AttackStrategy &attack);

// ---------------------------------------------------------------------------
// Ancilla construction

/// A vector of Eve's 4-dimensional ancilla space (two qubits, index = bit0 + 2*bit1).
using AncillaVector = std::array<double, 4>;

struct AncillaVectors {
    AncillaVector v00, v01, v10, v11;
};

/// zeta00 = e0, zeta01 = e1, zeta10 = cos(beta) e1 + sin(beta) e2,
/// zeta11 = cos(alpha) e0 + sin(alpha) e3.
AncillaVectors build_ancilla_vectors(double alpha, double beta);

double inner(const AncillaVector &x, const AncillaVector &y);

/// Images of |0> and |1> under A|0>v00 + B|1>v01, B|0>v10 + A|1>v11, over
/// (target, ancilla bit 0, ancilla bit 1) with the target as bit 0.
struct IsometryColumns {
    std::vector<Complex> column0;
    std::vector<Complex> column1;
};
IsometryColumns entangling_columns(double A, double B, double alpha, double beta);

/// Ancilla labels used by the collective taps.
std::array<QubitLabel, 2> zeta_labels();
std::array<QubitLabel, 2> eta_labels();

// ---------------------------------------------------------------------------
// Channel and source hooks

/// Applies one entangling isometry to every qubit it sees.
class CollectiveTap : public ChannelTap {
  public:
    CollectiveTap(double A, double B, double alpha, double beta, std::array<QubitLabel, 2> ancillas);
    void intercept(StateVector &reg, const QubitLabel &in_flight, RandomSource &rng) override;

  private:
    IsometryColumns columns_;
    std::array<QubitLabel, 2> ancillas_;
};

struct CollectiveTapPair {
    std::unique_ptr<CollectiveTap> ca;
    std::unique_ptr<CollectiveTap> cb;
};

/// E2 on the Charlie-Alice qubit (zeta ancillas) and E3 on the Charlie-Bob
/// qubit (eta ancillas).
CollectiveTapPair collective_tap(const CollectiveParams &params);

/// Measures each qubit in a uniformly random Z/X basis and forwards the
/// collapsed qubit.
class InterceptResendTap : public ChannelTap {
  public:
    void intercept(StateVector &reg, const QubitLabel &in_flight, RandomSource &rng) override;
};

/// Hands out Eve's state in place of Charlie's pairs and announces a random
/// k_C (or the forced one).
class ImpersonationSource : public PairSource {
  public:
    explicit ImpersonationSource(const ImpersonationParams &params);
    SourceEmission emit(std::size_t index, std::optional<ClassicalBit> forced_announcement,
                        RandomSource &rng) override;

  private:
    Factor pair_;
};

std::unique_ptr<ImpersonationSource> impersonate_source(const ImpersonationParams &params);

// ---------------------------------------------------------------------------
// Eve's measurement

/// Helstrom-optimal projective measurement for two equiprobable real states
/// at angle theta: two orthonormal vectors in their span, the first favoring
/// the state along `u`. Success probability is (1 + sin theta) / 2.
std::array<AncillaVector, 2> helstrom_pair(const AncillaVector &u, const AncillaVector &u_perp, double theta);

/// Four-outcome ancilla basis. Outcomes 0..3 stand for v00, v11, v01, v10.
std::array<AncillaVector, 4> eve_basis(double alpha, double beta);

/// Channel bit value Eve infers from an ancilla outcome (v00 and v10 -> 0).
ClassicalBit eve_channel_bit(int outcome);

/// Two-character name of an outcome ("00", "11", "01", "10").
std::string eve_outcome_name(int outcome);

/// Eve's residual error when reading the channel parity from both ancillas.
double eve_model_error(const CollectiveParams &params);

struct EveGuess {
    int zeta_outcome;
    int eta_outcome;
    ClassicalBit guess;
};

/// Measures the zeta and eta ancillas and guesses K as the MAP decision on
/// k_C ^ k_A ^ (channel parity estimate) under prior e and the model error.
/// Throws if the register carries no ancillas.
EveGuess eve_measure_and_guess(StateVector &reg, ClassicalBit k_c, ClassicalBit k_a, const CollectiveParams &params,
                               RandomSource &rng);

/// Per-bit log of what Eve saw and guessed; `truth` is filled in by the
/// caller from the honest parties' key.
struct EveRecord {
    std::vector<int> zeta_outcomes;
    std::vector<int> eta_outcomes;
    std::vector<ClassicalBit> guesses;
    std::vector<ClassicalBit> truth;
};

/// Observer that runs eve_measure_and_guess on every round.
class EveObserver : public RegisterObserver {
  public:
    explicit EveObserver(const CollectiveParams &params) : params_(params) {}
    void observe(const RoundView &view, StateVector &reg, RandomSource &rng) override;

    EveRecord &record() { return record_; }

  private:
    CollectiveParams params_;
    EveRecord record_;
};

/// The hooks one attack needs, owned by one session or one work unit.
struct AttackHooks {
    CollectiveTapPair collective;
    std::unique_ptr<ImpersonationSource> source;
    InterceptResendTap intercept;

    /// Points the session's tap and source slots at these hooks. Throws for
    /// an attack the chosen protocol has no channel for.
    void install(const AttackStrategy &attack, SessionOptions &options, int protocol);
};

// ---------------------------------------------------------------------------
// Exact states

/// Register after Charlie's pair (or Eve's pair), both taps, and both
/// participants' CNOTs; labels 1, 2, 3, 4 plus any ancillas.
StateVector attacked_state(const Preparation &prep, const CollectiveParams *params,
                           const ImpersonationParams *source);

/// Exact probability that the joint Bell outcome falls outside the honest
/// expansion for this preparation.
double exact_detection(const Preparation &prep, const CollectiveParams *params, const ImpersonationParams *source);

/// Exact probability of each (Alice, Bob) Bell outcome, Alice on (1, 2) and
/// Bob on (3, 4), indexed [alice][bob].
std::array<std::array<double, 4>, 4> joint_bell_distribution(const StateVector &state);

}  // namespace cqka

#endif  // CQKA_ADVERSARY_HPP
