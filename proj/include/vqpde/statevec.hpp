// Copyright 2026 The vqpde Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <complex>
#include <initializer_list>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vqpde {

using Complex = std::complex<double>;

/// Dense statevector of 2^n complex amplitudes.
///
/// Index convention is little-endian: qubit k is bit k of the basis index.
/// Instances are immutable; every operation in this module returns a new
/// state.
class QuantumState {
 public:
  QuantumState() = default;

  /// |0...0> on n qubits.
  explicit QuantumState(std::size_t n_qubits);

  /// Takes ownership of the amplitudes; throws if the length is not 2^n.
  QuantumState(std::size_t n_qubits, std::vector<Complex> amplitudes);

  static QuantumState basis(std::size_t n_qubits, std::size_t index);
  static QuantumState uniform(std::size_t n_qubits);
  /// Real samples as amplitudes, unnormalized.
  static QuantumState from_real(std::span<const double> samples);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm() const;
  bool is_normalized(double tol = 1e-12) const;

  QuantumState scaled(Complex factor) const;

 private:
  std::size_t n_qubits_ = 0;
  std::vector<Complex> amps_{Complex{1.0, 0.0}};
};

/// One axis of the spatial grid: `qubits` qubits encode 2^qubits points
/// spaced `spacing` apart.
struct Axis {
  std::string label;
  std::size_t qubits = 0;
  double spacing = 1.0;
};

/// Assignment of grid axes to contiguous qubit ranges. The first axis
/// occupies the lowest qubits, so the flattened grid index is
/// j_0 + 2^{n_0} j_1 + 2^{n_0 + n_1} j_2. Grid point j sits at x_j = j * spacing.
class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Axis> axes);

  /// Single-axis convenience layout.
  static RegisterLayout line(std::string label, std::size_t qubits,
                             double spacing = 1.0);

  std::span<const Axis> axes() const { return axes_; }
  std::size_t total_qubits() const { return total_qubits_; }
  std::size_t dim() const { return std::size_t{1} << total_qubits_; }

  bool has_axis(const std::string& label) const;
  /// Throws std::invalid_argument for unknown labels.
  std::size_t axis_index(const std::string& label) const;
  const Axis& axis(const std::string& label) const;
  std::size_t qubit_offset(const std::string& label) const;

  /// Per-axis integer coordinates of a flattened basis index.
  std::vector<std::size_t> coordinates(std::size_t flat_index) const;
  /// Physical position (j * spacing) along each axis.
  std::vector<double> position(std::size_t flat_index) const;

  bool operator==(const RegisterLayout& other) const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> offsets_;
  std::size_t total_qubits_ = 0;
};

namespace gate {
struct Hadamard {};
struct RX {
  double theta;
};
struct RY {
  double theta;
};
struct RZ {
  double theta;
};
struct PauliX {};
struct PauliZ {};
/// targets = {control, target}
struct ControlledNot {};
/// targets = {a, b}; symmetric diag(1, 1, 1, e^{i theta})
struct ControlledPhase {
  double theta;
};
struct Swap {};
}  // namespace gate

using Gate = std::variant<gate::Hadamard, gate::RX, gate::RY, gate::RZ,
                          gate::PauliX, gate::PauliZ, gate::ControlledNot,
                          gate::ControlledPhase, gate::Swap>;

/// Number of qubits a gate acts on (1 or 2).
std::size_t gate_arity(const Gate& g);

/// Applies a gate to the listed qubits. Throws std::out_of_range for indices
/// beyond the register and std::invalid_argument for duplicates, a wrong
/// target count, or non-finite angles.
QuantumState apply_gate(const QuantumState& state, const Gate& g,
                        std::span<const std::size_t> targets);
QuantumState apply_gate(const QuantumState& state, const Gate& g,
                        std::initializer_list<std::size_t> targets);

enum class Direction { Forward, Backward };

/// Cyclic Adder on one axis register: Forward maps j -> (j + 1) mod 2^n_axis,
/// Backward is its inverse. Other axes are untouched.
QuantumState apply_shift(const QuantumState& state, const RegisterLayout& layout,
                         const std::string& axis, Direction direction);

/// Pointwise multiplication a_i -> values_i * a_i (not unitary in general).
QuantumState apply_diagonal(const QuantumState& state,
                            std::span<const double> values);

/// sum_i conj(bra_i) ket_i
Complex inner(const QuantumState& bra, const QuantumState& ket);

/// Discrete Fourier transform on a contiguous qubit range, built from
/// Hadamard, controlled-phase and swap gates:
///   |j> -> 2^{-n/2} sum_k exp(+2 pi i j k / 2^n) |k>.
QuantumState apply_qft(const QuantumState& state, std::size_t first_qubit,
                       std::size_t count, bool inverse = false);

/// QFT on one axis register of the layout.
QuantumState qft(const QuantumState& state, const RegisterLayout& layout,
                 const std::string& axis, bool inverse = false);

}  // namespace vqpde
