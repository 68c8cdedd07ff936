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

#include "vqpde/hadamard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace vqpde {

namespace {

std::uint64_t mix_seed(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Estimate sample_part(const QuantumState& bra, const QuantumState& ket,
                     const OpTerm& unit, const RegisterLayout& layout, Part part,
                     ShotMode mode) {
  const double p0 = std::clamp(hadamard_ancilla_p0(bra, ket, unit, layout, part),
                               0.0, 1.0);
  std::mt19937_64 rng(mode.seed);
  std::binomial_distribution<std::uint64_t> draw(mode.shots, p0);
  const std::uint64_t k = draw(rng);
  const double n = static_cast<double>(mode.shots);
  const double x = 2.0 * static_cast<double>(k) / n - 1.0;
  return {x, std::sqrt(std::max(0.0, 1.0 - x * x) / n)};
}

}  // namespace

double hadamard_ancilla_p0(const QuantumState& bra, const QuantumState& ket,
                           const OpTerm& op, const RegisterLayout& layout,
                           Part part) {
  OpTerm unit{1.0, op.atoms};
  const QuantumState uket = apply_term(unit, ket, layout, {});
  const std::size_t n = bra.n_qubits();
  const std::size_t dim = bra.dim();
  std::vector<Complex> joint(2 * dim);
  const double r = 1.0 / std::numbers::sqrt2;
  for (std::size_t i = 0; i < dim; ++i) {
    joint[i] = r * bra[i];
    joint[dim + i] = r * uket[i];
  }
  QuantumState s(n + 1, std::move(joint));
  if (part == Part::Imag) {
    s = apply_gate(s, gate::RZ{-std::numbers::pi / 2}, {n});
  }
  s = apply_gate(s, gate::Hadamard{}, {n});
  double p0 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) p0 += std::norm(s[i]);
  return p0;
}

Estimate hadamard_test(const QuantumState& bra, const QuantumState& ket,
                       const OpTerm& op, const RegisterLayout& layout, Part part,
                       std::optional<ShotMode> shots,
                       const FieldBindings& bindings) {
  if (bra.dim() != ket.dim()) {
    throw std::invalid_argument("bra and ket sizes differ");
  }
  if (!shots) {
    const Complex z = inner(bra, apply_term(op, ket, layout, bindings));
    return {part == Part::Real ? z.real() : z.imag(), 0.0};
  }
  if (!op.is_unitary()) {
    throw std::invalid_argument("shot-mode Hadamard test needs a unitary term, got " +
                                to_string(op));
  }
  if (shots->shots == 0) throw std::invalid_argument("shot count must be positive");
  if (!bra.is_normalized(1e-9) || !ket.is_normalized(1e-9)) {
    throw std::invalid_argument("shot-mode Hadamard test needs normalized states");
  }
  // Re(c z) = Re c Re z - Im c Im z ; Im(c z) = Im c Re z + Re c Im z
  const Complex c = op.coeff;
  const double w_re = part == Part::Real ? c.real() : c.imag();
  const double w_im = part == Part::Real ? -c.imag() : c.real();
  Estimate out;
  double var = 0.0;
  if (w_re != 0.0) {
    const Estimate e = sample_part(bra, ket, op, layout, Part::Real,
                                   {shots->shots, mix_seed(shots->seed)});
    out.value += w_re * e.value;
    var += w_re * w_re * e.std_error * e.std_error;
  }
  if (w_im != 0.0) {
    const Estimate e = sample_part(bra, ket, op, layout, Part::Imag,
                                   {shots->shots, mix_seed(shots->seed ^ 0x5bd1e995ULL)});
    out.value += w_im * e.value;
    var += w_im * w_im * e.std_error * e.std_error;
  }
  out.std_error = std::sqrt(var);
  return out;
}

}  // namespace vqpde
