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

#ifndef CQKA_ANALYSIS_HPP
#define CQKA_ANALYSIS_HPP

#include <cstddef>
#include <optional>
#include <string>

#include "cqka/adversary.hpp"
#include "cqka/parallel.hpp"
#include "cqka/protocol.hpp"

namespace cqka {

/// A Monte Carlo (or analytic, with std_error 0) estimate next to the
/// published closed form and an independent oracle.
struct MetricsReport {
    double estimate = 0;
    double std_error = 0;
    std::size_t sample_count = 0;
    std::optional<double> closed_form_paper;
    std::optional<double> closed_form_derived;
    /// |closed_form_paper - estimate| > 5 std_error.
    bool discrepancy_flag = false;

    static MetricsReport make(double estimate, double std_error, std::size_t samples, std::optional<double> paper,
                              std::optional<double> derived);

    /// Whether the derived oracle lies within `sigmas` standard errors (or
    /// `floor`, whichever is larger) of the estimate. False without an oracle.
    bool derived_within(double sigmas, double floor = 0) const;
};

inline constexpr double kFlagSigmas = 5.0;

double binomial_std_error(double p_hat, std::size_t n);

/// h2(q) in bits, with h2(0) = h2(1) = 0.
double binary_entropy(double q);

// ---------------------------------------------------------------------------
// Closed forms

struct CurvePoint {
    double paper;
    double derived;
};

/// Minimal detection probability at A = 1 and equal angles: the published
/// (1 + cos^2)/2 and the interference result (1 - cos^2)/2.
CurvePoint curve_detection_min(double alpha);

/// 1/2 [1 - h2((1 - sin^2 alpha)/2)].
double curve_eve_information(double alpha);

/// (1 - sin a_zeta sin a_eta) / 2.
double curve_qber(double alpha_zeta, double alpha_eta);

/// [(1 - d)/2]^n.
double curve_success(std::size_t n, double d);

/// The published general detection expression, every cosine product entering with a plus sign.
double detection_paper(const CollectiveParams &p);

/// Closed form of the exact projection:
/// 1/2 sum over (x, y) in {A, B}^2 of x_zeta^2 y_eta^2 (1 - cos x_angle cos y_angle).
double detection_derived(const CollectiveParams &p);

/// Mean exact detection probability over the eight preparations.
double detection_exact(const AttackStrategy &attack);

/// Exact I(K : Eve's guess) over undetected rounds, computed by projecting
/// on every preparation, honest outcome and ancilla outcome.
double exact_eve_information(const CollectiveParams &p);

/// Exact probability that Eve's channel-parity reading disagrees with the
/// Z record of the channel qubits.
double exact_qber(const CollectiveParams &p);

/// Success probability quoted in the literature for n = 6 at d = 25%.
inline constexpr double kQuotedSuccessSixBits = 2.629e-3;

/// Analytic check of the quoted value against [(1 - 0.25)/2]^6.
MetricsReport quoted_success_check();

// ---------------------------------------------------------------------------
// Monte Carlo estimators

struct EstimatorOptions {
    std::size_t sessions = 100000;
    std::uint64_t seed = 0;
    Execution exec = Execution::Parallel;
};

/// Single-bit controlled sessions without decoys; counts runs whose joint
/// outcome is absent from the honest expansion. `prep` pins the preparation
/// (k_C for impersonation is the announced bit).
MetricsReport estimate_detection(const AttackStrategy &attack, const EstimatorOptions &opt,
                                 std::optional<Preparation> prep = std::nullopt);

/// Key bits whose (truth, guess) pair enters the histogram, and its counts.
struct GuessHistogram {
    std::size_t counts[2][2] = {{0, 0}, {0, 0}};
    std::size_t sessions = 0;
    std::size_t detected = 0;

    std::size_t total() const { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
    void merge(const GuessHistogram &o);
};

/// Plug-in mutual information of a 2x2 histogram and its delta-method std error.
std::pair<double, double> plug_in_information(const GuessHistogram &h);

/// Runs enough single-bit sessions under the collective attack that about
/// `key_bits` of them pass undetected, and estimates I(K : guess) on those.
MetricsReport estimate_mutual_information(const CollectiveParams &p, std::size_t key_bits,
                                          const EstimatorOptions &opt, GuessHistogram *histogram = nullptr);

/// Operational error rate of Eve's channel-parity reading.
MetricsReport estimate_qber(const CollectiveParams &p, const EstimatorOptions &opt);

struct SuccessReport {
    /// Probability that every key bit of a session passes undetected and Eve guesses all of them.
    MetricsReport success;
    /// Per-bit detection rate measured in the same sessions.
    MetricsReport detection;
};

/// n-bit controlled sessions under the collective attack. The success
/// report's published closed form uses the measured d, its oracle the exact d.
SuccessReport estimate_success(const CollectiveParams &p, std::size_t n, const EstimatorOptions &opt);

/// P(K = 0) over honest controlled sessions of `n` bits with the given
/// forcing; `opt.sessions` counts key bits.
MetricsReport fairness_report(const Forcing &forcing, const EstimatorOptions &opt, std::size_t n = 16,
                              int protocol = 1);

struct DecoyStats {
    MetricsReport error_rate;
    std::size_t decoys = 0;
    std::size_t sessions = 0;
    std::size_t aborted = 0;
    /// Sessions stopped by the decoy check itself.
    std::size_t decoy_aborted = 0;
};

/// Decoy error rate of sessions under `attack` with n key bits and p
/// decoys per channel; opt.sessions sessions.
DecoyStats estimate_decoy_error(const AttackStrategy &attack, std::size_t n, std::size_t p, double tolerance,
                                const EstimatorOptions &opt, int protocol = 1);

/// Probability that at least one channel fails its decoy check when each
/// decoy errs independently with probability q.
double decoy_abort_probability(std::size_t p, double tolerance, double q, int channels);

// ---------------------------------------------------------------------------
// Efficiency

struct EfficiencyFigures {
    std::size_t b_s = 0;
    std::size_t q_t = 0;
    std::size_t b_t = 0;
    double eta1 = 0;
    double eta2 = 0;
};

/// Qubit and classical-bit budget per n key bits (taken as n = 1), decoys excluded.
EfficiencyFigures efficiency_for(int protocol);

struct ComparisonRow {
    std::string protocol;
    std::string parties;
    std::string resource;
    std::string communication;
    std::string quantum_memory;
    std::string third_party;
    std::string eta1;
    std::string eta2;
    bool simulated;
};

/// Our two protocols followed by six literature rows kept as reference constants.
std::vector<ComparisonRow> comparison_table();

}  // namespace cqka

#endif  // CQKA_ANALYSIS_HPP
