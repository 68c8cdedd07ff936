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

#include "vqpde/statevec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vqpde {

namespace {

constexpr std::size_t kMaxQubits = 30;

using Mat2 = std::array<Complex, 4>;  // row-major

QuantumState apply_single(const QuantumState& state, const Mat2& m,
                          std::size_t q) {
  std::vector<Complex> out(state.amplitudes().begin(),
                           state.amplitudes().end());
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i & bit) continue;
    const Complex a0 = out[i];
    const Complex a1 = out[i | bit];
    out[i] = m[0] * a0 + m[1] * a1;
    out[i | bit] = m[2] * a0 + m[3] * a1;
  }
  return QuantumState(state.n_qubits(), std::move(out));
}

void require_finite(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("gate angle must be finite");
  }
}

}  // namespace

QuantumState::QuantumState(std::size_t n_qubits)
    : n_qubits_(n_qubits) {
  if (n_qubits > kMaxQubits) throw std::invalid_argument("too many qubits");
  amps_.assign(std::size_t{1} << n_qubits, Complex{});
  amps_[0] = 1.0;
}

QuantumState::QuantumState(std::size_t n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits > kMaxQubits) throw std::invalid_argument("too many qubits");
  if (amps_.size() != (std::size_t{1} << n_qubits)) {
    throw std::invalid_argument("amplitude count must be 2^n_qubits");
  }
}

QuantumState QuantumState::basis(std::size_t n_qubits, std::size_t index) {
  std::vector<Complex> a(std::size_t{1} << n_qubits);
  if (index >= a.size()) throw std::out_of_range("basis index out of range");
  a[index] = 1.0;
  return QuantumState(n_qubits, std::move(a));
}

QuantumState QuantumState::uniform(std::size_t n_qubits) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  return QuantumState(n_qubits, std::vector<Complex>(
                                    dim, 1.0 / std::sqrt(static_cast<double>(dim))));
}

QuantumState QuantumState::from_real(std::span<const double> samples) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < samples.size()) ++n;
  if ((std::size_t{1} << n) != samples.size()) {
    throw std::invalid_argument("sample count must be a power of two");
  }
  return QuantumState(n, std::vector<Complex>(samples.begin(), samples.end()));
}

double QuantumState::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

bool QuantumState::is_normalized(double tol) const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::abs(s - 1.0) <= tol;
}

QuantumState QuantumState::scaled(Complex factor) const {
  std::vector<Complex> out(amps_);
  for (auto& a : out) a *= factor;
  return QuantumState(n_qubits_, std::move(out));
}

RegisterLayout::RegisterLayout(std::vector<Axis> axes) : axes_(std::move(axes)) {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const Axis& a = axes_[i];
    if (a.label.empty()) throw std::invalid_argument("axis label is empty");
    if (!(a.spacing > 0.0) || !std::isfinite(a.spacing)) {
      throw std::invalid_argument("axis '" + a.label + "' needs spacing > 0");
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (axes_[k].label == a.label) {
        throw std::invalid_argument("duplicate axis label '" + a.label + "'");
      }
    }
    offsets_.push_back(total_qubits_);
    total_qubits_ += a.qubits;
  }
  if (total_qubits_ > kMaxQubits) throw std::invalid_argument("too many qubits");
}

RegisterLayout RegisterLayout::line(std::string label, std::size_t qubits,
                                    double spacing) {
  return RegisterLayout({Axis{std::move(label), qubits, spacing}});
}

bool RegisterLayout::has_axis(const std::string& label) const {
  return std::any_of(axes_.begin(), axes_.end(),
                     [&](const Axis& a) { return a.label == label; });
}

std::size_t RegisterLayout::axis_index(const std::string& label) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].label == label) return i;
  }
  throw std::invalid_argument("unknown axis '" + label + "'");
}

const Axis& RegisterLayout::axis(const std::string& label) const {
  return axes_[axis_index(label)];
}

std::size_t RegisterLayout::qubit_offset(const std::string& label) const {
  return offsets_[axis_index(label)];
}

std::vector<std::size_t> RegisterLayout::coordinates(std::size_t flat_index) const {
  std::vector<std::size_t> c(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const std::size_t mask = (std::size_t{1} << axes_[i].qubits) - 1;
    c[i] = (flat_index >> offsets_[i]) & mask;
  }
  return c;
}

std::vector<double> RegisterLayout::position(std::size_t flat_index) const {
  const auto c = coordinates(flat_index);
  std::vector<double> x(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    x[i] = static_cast<double>(c[i]) * axes_[i].spacing;
  }
  return x;
}

bool RegisterLayout::operator==(const RegisterLayout& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].label != other.axes_[i].label ||
        axes_[i].qubits != other.axes_[i].qubits ||
        axes_[i].spacing != other.axes_[i].spacing) {
      return false;
    }
  }
  return true;
}

std::size_t gate_arity(const Gate& g) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, gate::ControlledNot> ||
                      std::is_same_v<T, gate::ControlledPhase> ||
                      std::is_same_v<T, gate::Swap>) {
          return 2;
        } else {
          return 1;
        }
      },
      g);
}

QuantumState apply_gate(const QuantumState& state, const Gate& g,
                        std::span<const std::size_t> targets) {
  if (targets.size() != gate_arity(g)) {
    throw std::invalid_argument("wrong number of gate targets");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= state.n_qubits()) {
      throw std::out_of_range("gate target beyond register");
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (targets[k] == targets[i]) {
        throw std::invalid_argument("duplicate gate targets");
      }
    }
  }

  const double r = 1.0 / std::numbers::sqrt2;
  const Complex i1{0.0, 1.0};

  return std::visit(
      [&](const auto& x) -> QuantumState {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, gate::Hadamard>) {
          return apply_single(state, {r, r, r, -r}, targets[0]);
        } else if constexpr (std::is_same_v<T, gate::RX>) {
          require_finite(x.theta);
          const double c = std::cos(x.theta / 2), s = std::sin(x.theta / 2);
          return apply_single(state, {c, -i1 * s, -i1 * s, c}, targets[0]);
        } else if constexpr (std::is_same_v<T, gate::RY>) {
          require_finite(x.theta);
          const double c = std::cos(x.theta / 2), s = std::sin(x.theta / 2);
          return apply_single(state, {c, -s, s, c}, targets[0]);
        } else if constexpr (std::is_same_v<T, gate::RZ>) {
          require_finite(x.theta);
          return apply_single(state,
                              {std::polar(1.0, -x.theta / 2), 0.0, 0.0,
                               std::polar(1.0, x.theta / 2)},
                              targets[0]);
        } else if constexpr (std::is_same_v<T, gate::PauliX>) {
          return apply_single(state, {0.0, 1.0, 1.0, 0.0}, targets[0]);
        } else if constexpr (std::is_same_v<T, gate::PauliZ>) {
          return apply_single(state, {1.0, 0.0, 0.0, -1.0}, targets[0]);
        } else {
          std::vector<Complex> out(state.amplitudes().begin(),
                                   state.amplitudes().end());
          const std::size_t b0 = std::size_t{1} << targets[0];
          const std::size_t b1 = std::size_t{1} << targets[1];
          if constexpr (std::is_same_v<T, gate::ControlledNot>) {
            for (std::size_t i = 0; i < out.size(); ++i) {
              if ((i & b0) && !(i & b1)) std::swap(out[i], out[i | b1]);
            }
          } else if constexpr (std::is_same_v<T, gate::ControlledPhase>) {
            require_finite(x.theta);
            const Complex ph = std::polar(1.0, x.theta);
            for (std::size_t i = 0; i < out.size(); ++i) {
              if ((i & b0) && (i & b1)) out[i] *= ph;
            }
          } else {
            for (std::size_t i = 0; i < out.size(); ++i) {
              if ((i & b0) && !(i & b1)) std::swap(out[i], out[(i & ~b0) | b1]);
            }
          }
          return QuantumState(state.n_qubits(), std::move(out));
        }
      },
      g);
}

QuantumState apply_gate(const QuantumState& state, const Gate& g,
                        std::initializer_list<std::size_t> targets) {
  return apply_gate(state, g,
                    std::span<const std::size_t>(targets.begin(), targets.size()));
}

QuantumState apply_shift(const QuantumState& state, const RegisterLayout& layout,
                         const std::string& axis, Direction direction) {
  if (layout.total_qubits() != state.n_qubits()) {
    throw std::invalid_argument("layout does not match state size");
  }
  const std::size_t offset = layout.qubit_offset(axis);
  const std::size_t n = layout.axis(axis).qubits;
  const std::size_t size = std::size_t{1} << n;
  const std::size_t mask = (size - 1) << offset;
  const std::size_t step = direction == Direction::Forward ? 1 : size - 1;

  std::vector<Complex> out(state.dim());
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const std::size_t j = (i & mask) >> offset;
    const std::size_t target = (i & ~mask) | (((j + step) % size) << offset);
    out[target] = state[i];
  }
  return QuantumState(state.n_qubits(), std::move(out));
}

QuantumState apply_diagonal(const QuantumState& state,
                            std::span<const double> values) {
  if (values.size() != state.dim()) {
    throw std::invalid_argument("diagonal length does not match state");
  }
  std::vector<Complex> out(state.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[i] * state[i];
  return QuantumState(state.n_qubits(), std::move(out));
}

Complex inner(const QuantumState& bra, const QuantumState& ket) {
  if (bra.dim() != ket.dim()) {
    throw std::invalid_argument("inner product of states with different sizes");
  }
  Complex s{};
  for (std::size_t i = 0; i < bra.dim(); ++i) s += std::conj(bra[i]) * ket[i];
  return s;
}

QuantumState apply_qft(const QuantumState& state, std::size_t first_qubit,
                       std::size_t count, bool inverse) {
  if (first_qubit + count > state.n_qubits()) {
    throw std::out_of_range("QFT range beyond register");
  }
  const double pi = std::numbers::pi;
  QuantumState s = state;
  auto q = [&](std::size_t k) { return first_qubit + k; };
  auto swaps = [&] {
    for (std::size_t k = 0; k < count / 2; ++k) {
      s = apply_gate(s, gate::Swap{}, {q(k), q(count - 1 - k)});
    }
  };
  if (!inverse) {
    for (std::size_t k = count; k-- > 0;) {
      s = apply_gate(s, gate::Hadamard{}, {q(k)});
      for (std::size_t m = k; m-- > 0;) {
        const double theta = pi / static_cast<double>(std::size_t{1} << (k - m));
        s = apply_gate(s, gate::ControlledPhase{theta}, {q(m), q(k)});
      }
    }
    swaps();
  } else {
    swaps();
    for (std::size_t k = 0; k < count; ++k) {
      for (std::size_t m = 0; m < k; ++m) {
        const double theta = pi / static_cast<double>(std::size_t{1} << (k - m));
        s = apply_gate(s, gate::ControlledPhase{-theta}, {q(m), q(k)});
      }
      s = apply_gate(s, gate::Hadamard{}, {q(k)});
    }
  }
  return s;
}

QuantumState qft(const QuantumState& state, const RegisterLayout& layout,
                 const std::string& axis, bool inverse) {
  if (layout.total_qubits() != state.n_qubits()) {
    throw std::invalid_argument("layout does not match state size");
  }
  return apply_qft(state, layout.qubit_offset(axis), layout.axis(axis).qubits,
                   inverse);
}

}  // namespace vqpde
