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

#ifndef CQKA_QCORE_HPP
#define CQKA_QCORE_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqka/random.hpp"

namespace cqka {

using Complex = std::complex<double>;

/// A 0/1 value. Kept as a byte so bit sequences are plain vectors.
using ClassicalBit = std::uint8_t;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Thrown for any precondition violation in the engine or protocol layer.
class QcoreError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Symbolic name of a qubit ("1", "2", "zeta.0", ...). Labels, never
/// positions, appear in public interfaces.
class QubitLabel {
  public:
    QubitLabel() = default;
    QubitLabel(std::string name) : name_(std::move(name)) {}
    QubitLabel(const char *name) : name_(name) {}

    const std::string &name() const { return name_; }

    friend bool operator==(const QubitLabel &, const QubitLabel &) = default;
    friend auto operator<=>(const QubitLabel &, const QubitLabel &) = default;

  private:
    std::string name_;
};

enum class BellState : std::uint8_t { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };
enum class BasisChoice : std::uint8_t { Z = 0, X = 1 };

inline constexpr std::array<BellState, 4> kAllBellStates = {
    BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus};

std::string_view name_of(BellState b);
std::string_view name_of(BasisChoice b);

/// Amplitudes of a Bell state over (first, second), index = first + 2*second.
/// psi- is (|01> - |10>)/sqrt2 with |xy> meaning first=x, second=y.
std::array<Complex, 4> bell_amplitudes(BellState b);

/// Eigenvector of `basis` for eigenvalue index `bit` (Z: |0>,|1>; X: |+>,|->).
std::array<Complex, 2> basis_state(BasisChoice basis, ClassicalBit bit);

/// A pure state over an ordered list of labels, little-endian: labels[k] is
/// bit k of the amplitude index. Used both to build registers and to
/// address subsystems in projections.
struct Factor {
    std::vector<QubitLabel> labels;
    std::vector<Complex> amps;

    static Factor qubit(QubitLabel q, Complex a0, Complex a1);
    static Factor basis(QubitLabel q, BasisChoice basis, ClassicalBit bit);
    static Factor bell(QubitLabel first, QubitLabel second, BellState b);
    static Factor joint(std::vector<QubitLabel> labels, std::vector<Complex> amps);
};

/// Unnormalized amplitudes over a set of labels; the result of a partial
/// projection. Same index convention as StateVector.
struct Amplitudes {
    std::vector<QubitLabel> labels;
    std::vector<Complex> amps;

    double norm_squared() const;
};

/// Dense normalized state of up to kMaxQubits labeled qubits.
class StateVector {
  public:
    static constexpr std::size_t kMaxQubits = 8;

    /// Tensor product of `factors`, in order. Labels must be unique and
    /// every factor a unit vector.
    explicit StateVector(std::span<const Factor> factors);
    StateVector(std::initializer_list<Factor> factors)
        : StateVector(std::span<const Factor>(factors.begin(), factors.size())) {}

    std::size_t num_qubits() const { return labels_.size(); }
    const std::vector<QubitLabel> &labels() const { return labels_; }
    std::span<const Complex> amplitudes() const { return amps_; }

    bool has(const QubitLabel &q) const;
    /// Bit position of `q`; throws if absent.
    std::size_t position(const QubitLabel &q) const;

    /// Appends fresh qubits in the given pure state.
    void append(const Factor &f);

    double norm_squared() const;

    // Engine kernels act in place; the free functions below are the
    // value-semantics surface.
    void cnot(const QubitLabel &control, const QubitLabel &target);
    void isometry(const QubitLabel &target, std::span<const QubitLabel> ancillas,
                  std::span<const Complex> column0, std::span<const Complex> column1);
    /// Born probabilities of projecting `labels` onto each vector of `basis`.
    std::vector<double> probabilities(std::span<const QubitLabel> labels,
                                      std::span<const std::vector<Complex>> basis) const;
    /// Samples an outcome of the projective measurement and collapses in place.
    std::size_t measure(std::span<const QubitLabel> labels, std::span<const std::vector<Complex>> basis,
                        RandomSource &rng);

  private:
    StateVector() = default;
    friend Amplitudes project(const StateVector &state, const Factor &onto);

    std::vector<QubitLabel> labels_;
    std::vector<Complex> amps_;
};

StateVector make_state(std::span<const Factor> factors);

StateVector apply_cnot(StateVector state, const QubitLabel &control, const QubitLabel &target);

/// Couples `target` to fresh `ancillas`: |0>_t -> column0, |1>_t -> column1,
/// where columns live in target (x) ancillas with the target as bit 0.
/// Columns must be unit vectors with zero mutual overlap (within 1e-10).
StateVector apply_isometry(StateVector state, const QubitLabel &target, std::span<const QubitLabel> ancillas,
                           std::span<const Complex> column0, std::span<const Complex> column1);

template <typename T>
struct Measured {
    T outcome;
    StateVector state;
};

Measured<BellState> measure_bell(StateVector state, const QubitLabel &q1, const QubitLabel &q2, RandomSource &rng);
Measured<ClassicalBit> measure_single(StateVector state, const QubitLabel &q, BasisChoice basis, RandomSource &rng);

/// Exact Bell outcome probabilities on (q1, q2), indexed by BellState.
std::array<double, 4> bell_probabilities(const StateVector &state, const QubitLabel &q1, const QubitLabel &q2);

/// Partial inner product <onto| (x) I |state>; the remaining labels keep
/// their relative order.
Amplitudes project(const StateVector &state, const Factor &onto);
Amplitudes project(const Amplitudes &state, const Factor &onto);

/// <assignment|state> where the factors jointly cover every label once.
Complex amplitude_of(const StateVector &state, std::span<const Factor> assignment);
Complex amplitude_of(const StateVector &state, std::initializer_list<Factor> assignment);

}  // namespace cqka

#endif  // CQKA_QCORE_HPP
