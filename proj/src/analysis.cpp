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

#include "cqka/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace cqka {

namespace {

struct Count {
    std::size_t hits = 0;
    std::size_t total = 0;
    void merge(const Count &o) {
        hits += o.hits;
        total += o.total;
    }
};

void require_sessions(std::size_t s) {
    if (s == 0) {
        throw QcoreError("at least one session is required");
    }
}

double xlog2(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

Forcing forcing_for(const Preparation &prep) {
    Forcing f;
    f.charlie = prep.charlie;
    f.alice = prep.alice;
    f.bob = prep.bob;
    return f;
}

std::vector<Complex> ancilla_amps(const AncillaVector &v) { return {v[0], v[1], v[2], v[3]}; }

double plug_in(const double p[2][2]) {
    double px[2] = {p[0][0] + p[0][1], p[1][0] + p[1][1]};
    double py[2] = {p[0][0] + p[1][0], p[0][1] + p[1][1]};
    double i = 0;
    for (int x = 0; x < 2; x++) {
        for (int y = 0; y < 2; y++) {
            if (p[x][y] > 0) {
                i += p[x][y] * std::log2(p[x][y] / (px[x] * py[y]));
            }
        }
    }
    return std::max(0.0, i);
}

/// Probabilities of Eve's 4x4 ancilla outcomes on a projected amplitude set.
std::array<std::array<double, 4>, 4> eve_outcome_probabilities(const Amplitudes &anc, const CollectiveParams &p) {
    auto zb = eve_basis(p.alpha_zeta, p.beta_zeta);
    auto eb = eve_basis(p.alpha_eta, p.beta_eta);
    auto zl = zeta_labels();
    auto el = eta_labels();
    std::array<std::array<double, 4>, 4> out{};
    for (int oz = 0; oz < 4; oz++) {
        auto left = project(anc, Factor::joint({zl[0], zl[1]}, ancilla_amps(zb[oz])));
        for (int oe = 0; oe < 4; oe++) {
            out[oz][oe] = project(left, Factor::joint({el[0], el[1]}, ancilla_amps(eb[oe]))).norm_squared();
        }
    }
    return out;
}

}  // namespace

MetricsReport MetricsReport::make(double estimate, double std_error, std::size_t samples,
                                  std::optional<double> paper, std::optional<double> derived) {
    MetricsReport r;
    r.estimate = estimate;
    r.std_error = std::max(0.0, std_error);
    r.sample_count = samples;
    r.closed_form_paper = paper;
    r.closed_form_derived = derived;
    r.discrepancy_flag = paper && std::abs(*paper - estimate) > kFlagSigmas * r.std_error;
    return r;
}

bool MetricsReport::derived_within(double sigmas, double floor) const {
    if (!closed_form_derived) {
        return false;
    }
    return std::abs(*closed_form_derived - estimate) <= std::max(sigmas * std_error, floor);
}

double binomial_std_error(double p_hat, std::size_t n) {
    if (n == 0) {
        return 0;
    }
    return std::sqrt(std::max(0.0, p_hat * (1 - p_hat)) / static_cast<double>(n));
}

double binary_entropy(double q) {
    if (!(q >= 0 && q <= 1)) {
        throw QcoreError("binary entropy needs q in [0, 1]");
    }
    return -xlog2(q) - xlog2(1 - q);
}

CurvePoint curve_detection_min(double alpha) {
    double c2 = std::cos(alpha) * std::cos(alpha);
    return {(1 + c2) / 2, (1 - c2) / 2};
}

double curve_eve_information(double alpha) {
    double s2 = std::sin(alpha) * std::sin(alpha);
    return 0.5 * (1 - binary_entropy(std::clamp((1 - s2) / 2, 0.0, 1.0)));
}

double curve_qber(double alpha_zeta, double alpha_eta) {
    return (1 - std::sin(alpha_zeta) * std::sin(alpha_eta)) / 2;
}

double curve_success(std::size_t n, double d) {
    if (n == 0) {
        throw QcoreError("success probability needs n >= 1");
    }
    if (!(d >= 0 && d <= 1)) {
        throw QcoreError("detection probability must lie in [0, 1]");
    }
    return std::pow((1 - d) / 2, static_cast<double>(n));
}

namespace {

template <typename Sign>
double detection_sum(const CollectiveParams &p, Sign sign) {
    double az = p.A_zeta * p.A_zeta, bz = p.B_zeta * p.B_zeta;
    double ae = p.A_eta * p.A_eta, be = p.B_eta * p.B_eta;
    double caz = std::cos(p.alpha_zeta), cbz = std::cos(p.beta_zeta);
    double cae = std::cos(p.alpha_eta), cbe = std::cos(p.beta_eta);
    return 0.5 * (az * ae * sign(caz * cae) + az * be * sign(caz * cbe) + bz * ae * sign(cbz * cae) +
                  bz * be * sign(cbz * cbe));
}

}  // namespace

double detection_paper(const CollectiveParams &p) {
    return detection_sum(p, [](double c) { return 1 + c; });
}

double detection_derived(const CollectiveParams &p) {
    return detection_sum(p, [](double c) { return 1 - c; });
}

double detection_exact(const AttackStrategy &attack) {
    const auto *c = std::get_if<CollectiveParams>(&attack);
    const auto *i = std::get_if<ImpersonationParams>(&attack);
    if (std::holds_alternative<InterceptResend>(attack)) {
        throw QcoreError("no exact detection path for a measuring attack");
    }
    double sum = 0;
    for (const auto &prep : all_preparations()) {
        sum += exact_detection(prep, c, i);
    }
    return sum / 8;
}

double exact_eve_information(const CollectiveParams &p) {
    p.validate();
    double joint[2][2] = {{0, 0}, {0, 0}};
    for (const auto &prep : all_preparations()) {
        StateVector state = attacked_state(prep, &p, nullptr);
        for (const auto &term : expected_terms(prep)) {
            auto anc = project(project(state, Factor::bell("1", "2", term.alice)), Factor::bell("3", "4", term.bob));
            TwoBit r_a = encode_outcome(term.alice);
            ClassicalBit k_b = bob_announce_bit(term.bob);
            auto r_b = infer_counterpart(prep.charlie, prep.alice, k_b, r_a, Role::Alice);
            ClassicalBit key = final_key_bit(r_a, *r_b);
            auto probs = eve_outcome_probabilities(anc, p);
            double q = eve_model_error(p);
            for (int oz = 0; oz < 4; oz++) {
                for (int oe = 0; oe < 4; oe++) {
                    double w = probs[oz][oe] / 8;
                    ClassicalBit h = prep.charlie ^ prep.alice ^ eve_channel_bit(oz) ^ eve_channel_bit(oe);
                    double post0 = p.e * (h == 0 ? 1 - q : q);
                    double post1 = (1 - p.e) * (h == 1 ? 1 - q : q);
                    double g0 = post0 > post1 ? 1.0 : post1 > post0 ? 0.0 : p.e;
                    joint[key][0] += w * g0;
                    joint[key][1] += w * (1 - g0);
                }
            }
        }
    }
    double total = joint[0][0] + joint[0][1] + joint[1][0] + joint[1][1];
    if (total <= 0) {
        return 0;
    }
    for (auto &row : joint) {
        for (auto &x : row) {
            x /= total;
        }
    }
    return plug_in(joint);
}

double exact_qber(const CollectiveParams &p) {
    p.validate();
    auto taps = collective_tap(p);
    RandomSource unused(0);
    double err = 0;
    for (ClassicalBit k = 0; k < 2; k++) {
        StateVector reg{Factor::bell("2", "3", charlie_state(k))};
        taps.ca->intercept(reg, "2", unused);
        taps.cb->intercept(reg, "3", unused);
        for (ClassicalBit z2 = 0; z2 < 2; z2++) {
            auto a2 = project(reg, Factor::basis("2", BasisChoice::Z, z2));
            for (ClassicalBit z3 = 0; z3 < 2; z3++) {
                auto anc = project(a2, Factor::basis("3", BasisChoice::Z, z3));
                auto probs = eve_outcome_probabilities(anc, p);
                for (int oz = 0; oz < 4; oz++) {
                    for (int oe = 0; oe < 4; oe++) {
                        if ((eve_channel_bit(oz) ^ eve_channel_bit(oe)) != (z2 ^ z3)) {
                            err += probs[oz][oe] / 2;
                        }
                    }
                }
            }
        }
    }
    return err;
}

MetricsReport quoted_success_check() {
    double formula = curve_success(6, 0.25);
    return MetricsReport::make(formula, 0, 0, kQuotedSuccessSixBits, formula);
}

MetricsReport estimate_detection(const AttackStrategy &attack, const EstimatorOptions &opt,
                                 std::optional<Preparation> prep) {
    require_sessions(opt.sessions);
    if (auto *c = std::get_if<CollectiveParams>(&attack)) {
        c->validate();
    }
    if (auto *i = std::get_if<ImpersonationParams>(&attack)) {
        i->validate();
    }
    auto count = run_units<Count>(units_for(opt.sessions), opt.seed, opt.exec,
                                  [&](std::size_t u, RandomSource &rng, Count &acc) {
                                      AttackHooks hooks;
                                      SessionOptions o;
                                      o.n = 1;
                                      o.p = 0;
                                      o.spot_check_fraction = 0;
                                      hooks.install(attack, o, 1);
                                      if (prep) {
                                          o.forcing = forcing_for(*prep);
                                      }
                                      for (std::size_t s = 0; s < unit_sessions(u, opt.sessions); s++) {
                                          auto t = run_protocol1(o, rng);
                                          acc.hits += t.detected(0);
                                          acc.total++;
                                      }
                                  });
    double est = static_cast<double>(count.hits) / static_cast<double>(count.total);
    std::optional<double> paper, derived;
    if (auto *c = std::get_if<CollectiveParams>(&attack)) {
        paper = detection_paper(*c);
        derived = detection_derived(*c);
    } else if (std::holds_alternative<ImpersonationParams>(attack)) {
        paper = 0.5;
        derived = prep ? exact_detection(*prep, nullptr, &std::get<ImpersonationParams>(attack))
                       : detection_exact(attack);
    } else if (std::holds_alternative<NoAttack>(attack)) {
        derived = 0.0;
    }
    return MetricsReport::make(est, binomial_std_error(est, count.total), count.total, paper, derived);
}

void GuessHistogram::merge(const GuessHistogram &o) {
    for (int x = 0; x < 2; x++) {
        for (int y = 0; y < 2; y++) {
            counts[x][y] += o.counts[x][y];
        }
    }
    sessions += o.sessions;
    detected += o.detected;
}

std::pair<double, double> plug_in_information(const GuessHistogram &h) {
    std::size_t n = h.total();
    if (n == 0) {
        return {0, 0};
    }
    double p[2][2];
    for (int x = 0; x < 2; x++) {
        for (int y = 0; y < 2; y++) {
            p[x][y] = static_cast<double>(h.counts[x][y]) / static_cast<double>(n);
        }
    }
    double mi = plug_in(p);
    double px[2] = {p[0][0] + p[0][1], p[1][0] + p[1][1]};
    double py[2] = {p[0][0] + p[1][0], p[0][1] + p[1][1]};
    double second = 0;
    for (int x = 0; x < 2; x++) {
        for (int y = 0; y < 2; y++) {
            if (p[x][y] > 0) {
                double l = std::log2(p[x][y] / (px[x] * py[y]));
                second += p[x][y] * l * l;
            }
        }
    }
    double var = std::max(0.0, second - mi * mi) / static_cast<double>(n);
    return {mi, std::sqrt(var)};
}

MetricsReport estimate_mutual_information(const CollectiveParams &p, std::size_t key_bits,
                                          const EstimatorOptions &opt, GuessHistogram *histogram) {
    if (key_bits == 0) {
        throw QcoreError("at least one key bit is required");
    }
    p.validate();
    double d = std::min(detection_derived(p), 0.99);
    auto sessions = static_cast<std::size_t>(std::ceil(static_cast<double>(key_bits) / (1 - d)));
    auto h = run_units<GuessHistogram>(units_for(sessions), opt.seed, opt.exec,
                                       [&](std::size_t u, RandomSource &rng, GuessHistogram &acc) {
                                           auto taps = collective_tap(p);
                                           SessionOptions o;
                                           o.n = 1;
                                           o.p = 0;
                                           o.spot_check_fraction = 0;
                                           o.tap_ca = taps.ca.get();
                                           o.tap_cb = taps.cb.get();
                                           for (std::size_t s = 0; s < unit_sessions(u, sessions); s++) {
                                               EveObserver eve(p);
                                               o.observer = &eve;
                                               auto t = run_protocol1(o, rng);
                                               acc.sessions++;
                                               if (t.detected(0)) {
                                                   acc.detected++;
                                                   continue;
                                               }
                                               acc.counts[t.raw_key_alice[0]][eve.record().guesses[0]]++;
                                           }
                                       });
    if (histogram) {
        *histogram = h;
    }
    auto [mi, se] = plug_in_information(h);
    std::optional<double> paper;
    if (p.A_zeta == 1 && p.A_eta == 1) {
        paper = 0.5 * (1 - binary_entropy(curve_qber(p.alpha_zeta, p.alpha_eta)));
    }
    return MetricsReport::make(mi, se, h.total(), paper, exact_eve_information(p));
}

MetricsReport estimate_qber(const CollectiveParams &p, const EstimatorOptions &opt) {
    require_sessions(opt.sessions);
    p.validate();
    auto count = run_units<Count>(units_for(opt.sessions), opt.seed, opt.exec,
                                  [&](std::size_t u, RandomSource &rng, Count &acc) {
                                      auto taps = collective_tap(p);
                                      for (std::size_t s = 0; s < unit_sessions(u, opt.sessions); s++) {
                                          ClassicalBit k = rng.coin();
                                          StateVector reg{Factor::bell("2", "3", charlie_state(k))};
                                          taps.ca->intercept(reg, "2", rng);
                                          taps.cb->intercept(reg, "3", rng);
                                          auto m2 = measure_single(std::move(reg), "2", BasisChoice::Z, rng);
                                          auto m3 = measure_single(std::move(m2.state), "3", BasisChoice::Z, rng);
                                          // Eve's guess of K depends on the announcements only through
                                          // k_C ^ k_A; the channel parity is the part she reads.
                                          auto g = eve_measure_and_guess(m3.state, 0, 0, p, rng);
                                          ClassicalBit read = eve_channel_bit(g.zeta_outcome) ^
                                                              eve_channel_bit(g.eta_outcome);
                                          acc.hits += read != (m2.outcome ^ m3.outcome);
                                          acc.total++;
                                      }
                                  });
    double est = static_cast<double>(count.hits) / static_cast<double>(count.total);
    return MetricsReport::make(est, binomial_std_error(est, count.total), count.total,
                               curve_qber(p.alpha_zeta, p.alpha_eta), exact_qber(p));
}

namespace {

struct SuccessCount {
    std::size_t sessions = 0;
    std::size_t successes = 0;
    std::size_t bits = 0;
    std::size_t detected_bits = 0;
    void merge(const SuccessCount &o) {
        sessions += o.sessions;
        successes += o.successes;
        bits += o.bits;
        detected_bits += o.detected_bits;
    }
};

}  // namespace

SuccessReport estimate_success(const CollectiveParams &p, std::size_t n, const EstimatorOptions &opt) {
    require_sessions(opt.sessions);
    if (n == 0) {
        throw QcoreError("success probability needs n >= 1");
    }
    p.validate();
    auto c = run_units<SuccessCount>(units_for(opt.sessions), opt.seed, opt.exec,
                                     [&](std::size_t u, RandomSource &rng, SuccessCount &acc) {
                                         auto taps = collective_tap(p);
                                         SessionOptions o;
                                         o.n = n;
                                         o.p = 0;
                                         o.spot_check_fraction = 0;
                                         o.tap_ca = taps.ca.get();
                                         o.tap_cb = taps.cb.get();
                                         for (std::size_t s = 0; s < unit_sessions(u, opt.sessions); s++) {
                                             EveObserver eve(p);
                                             o.observer = &eve;
                                             auto t = run_protocol1(o, rng);
                                             bool all = true;
                                             for (std::size_t i = 0; i < n; i++) {
                                                 bool det = t.detected(i);
                                                 acc.detected_bits += det;
                                                 all = all && !det && eve.record().guesses[i] == t.raw_key_alice[i];
                                             }
                                             acc.bits += n;
                                             acc.successes += all;
                                             acc.sessions++;
                                         }
                                     });
    double d_sim = static_cast<double>(c.detected_bits) / static_cast<double>(c.bits);
    double d_exact = detection_derived(p);
    SuccessReport r;
    r.detection = MetricsReport::make(d_sim, binomial_std_error(d_sim, c.bits), c.bits, detection_paper(p), d_exact);
    double est = static_cast<double>(c.successes) / static_cast<double>(c.sessions);
    r.success = MetricsReport::make(est, binomial_std_error(est, c.sessions), c.sessions, curve_success(n, d_sim),
                                    curve_success(n, d_exact));
    return r;
}

MetricsReport fairness_report(const Forcing &forcing, const EstimatorOptions &opt, std::size_t n, int protocol) {
    require_sessions(opt.sessions);
    if (n == 0) {
        throw QcoreError("key length n must be at least 1");
    }
    std::size_t sessions = (opt.sessions + n - 1) / n;
    auto count = run_units<Count>(units_for(sessions), opt.seed, opt.exec,
                                  [&](std::size_t u, RandomSource &rng, Count &acc) {
                                      SessionOptions o;
                                      o.n = n;
                                      o.forcing = forcing;
                                      for (std::size_t s = 0; s < unit_sessions(u, sessions); s++) {
                                          auto t = protocol == 1 ? run_protocol1(o, rng) : run_protocol2(o, rng);
                                          for (auto k : t.raw_key_alice) {
                                              acc.hits += k == 0;
                                              acc.total++;
                                          }
                                      }
                                  });
    double est = static_cast<double>(count.hits) / static_cast<double>(count.total);
    return MetricsReport::make(est, binomial_std_error(est, count.total), count.total, 0.5, 0.5);
}

namespace {

struct DecoyCount {
    std::size_t errors = 0;
    std::size_t decoys = 0;
    std::size_t sessions = 0;
    std::size_t aborted = 0;
    std::size_t decoy_aborted = 0;
    void merge(const DecoyCount &o) {
        errors += o.errors;
        decoys += o.decoys;
        sessions += o.sessions;
        aborted += o.aborted;
        decoy_aborted += o.decoy_aborted;
    }
};

}  // namespace

double decoy_abort_probability(std::size_t p, double tolerance, double q, int channels) {
    if (p == 0) {
        return 0;
    }
    auto k_max = static_cast<std::size_t>(std::floor(tolerance * static_cast<double>(p) + 1e-9));
    double pass = 0;
    for (std::size_t k = 0; k <= std::min(k_max, p); k++) {
        if (q <= 0) {
            pass += k == 0 ? 1 : 0;
            continue;
        }
        if (q >= 1) {
            pass += k == p ? 1 : 0;
            continue;
        }
        double lp = std::lgamma(double(p) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(p - k) + 1) +
                    double(k) * std::log(q) + double(p - k) * std::log1p(-q);
        pass += std::exp(lp);
    }
    return 1 - std::pow(std::min(pass, 1.0), channels);
}

DecoyStats estimate_decoy_error(const AttackStrategy &attack, std::size_t n, std::size_t p, double tolerance,
                                const EstimatorOptions &opt, int protocol) {
    require_sessions(opt.sessions);
    auto c = run_units<DecoyCount>(units_for(opt.sessions), opt.seed, opt.exec,
                                   [&](std::size_t u, RandomSource &rng, DecoyCount &acc) {
                                       AttackHooks hooks;
                                       SessionOptions o;
                                       o.n = n;
                                       o.p = p;
                                       o.tolerance = tolerance;
                                       hooks.install(attack, o, protocol);
                                       for (std::size_t s = 0; s < unit_sessions(u, opt.sessions); s++) {
                                           auto t = protocol == 1 ? run_protocol1(o, rng) : run_protocol2(o, rng);
                                           double pd = static_cast<double>(p);
                                           acc.errors += static_cast<std::size_t>(std::llround(t.decoy_error_first * pd));
                                           acc.errors += static_cast<std::size_t>(std::llround(t.decoy_error_second * pd));
                                           acc.decoys += t.decoys_first.size() + t.decoys_second.size();
                                           acc.sessions++;
                                           acc.aborted += t.aborted;
                                           acc.decoy_aborted += t.aborted && (t.decoy_error_first > tolerance ||
                                                                              t.decoy_error_second > tolerance);
                                       }
                                   });
    DecoyStats s;
    double est = c.decoys == 0 ? 0.0 : static_cast<double>(c.errors) / static_cast<double>(c.decoys);
    std::optional<double> derived = std::holds_alternative<InterceptResend>(attack) ? std::optional<double>(0.25)
                                    : std::holds_alternative<NoAttack>(attack)    ? std::optional<double>(0.0)
                                                                                  : std::nullopt;
    s.error_rate = MetricsReport::make(est, binomial_std_error(est, c.decoys), c.decoys, std::nullopt, derived);
    s.decoys = c.decoys;
    s.sessions = c.sessions;
    s.aborted = c.aborted;
    s.decoy_aborted = c.decoy_aborted;
    return s;
}

EfficiencyFigures efficiency_for(int protocol) {
    EfficiencyFigures f;
    if (protocol == 1) {
        f.b_s = 1;
        f.q_t = 2;
        f.b_t = 3;
    } else if (protocol == 2) {
        f.b_s = 1;
        f.q_t = 1;
        f.b_t = 2;
    } else {
        throw QcoreError("protocol must be 1 or 2");
    }
    f.eta1 = static_cast<double>(f.b_s) / static_cast<double>(f.q_t + f.b_t);
    f.eta2 = static_cast<double>(f.b_s) / static_cast<double>(f.q_t);
    return f;
}

std::vector<ComparisonRow> comparison_table() {
    auto fmt = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", x);
        return std::string(buf);
    };
    auto p1 = efficiency_for(1);
    auto p2 = efficiency_for(2);
    return {
        {"Our Protocol 1", "3", "EPR", "one-way", "N", "Y", fmt(p1.eta1), fmt(p1.eta2), true},
        {"Our Protocol 2", "2", "EPR", "one-way", "N", "N", fmt(p2.eta1), fmt(p2.eta2), true},
        {"Huang et al.", "2", "EPR", "one-way", "Y", "N", "0.5", "1", false},
        {"Xu et al.", "3", "GHZ", "one-way", "Y", "N", "(n-ns)/(2n+ns) <0.5", "(n-s)/2n <0.5", false},
        {"Shukla et al.", "2", "EPR", "two-way", "Y", "N", "0.33", "0.5", false},
        {"He et al.", "2", "four-qubit cluster", "two-way", "Y", "N", "0.5", "1", false},
        {"Yang et al.", "2", "four-qubit cluster", "one-way", "Y", "N", "<0.5", "<1", false},
        {"Tang et al.", "2", "GHZ", "two-way", "Y", "Y", "0.285", "0.33", false},
    };
}

}  // namespace cqka
