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

#include <cstdint>
#include <optional>

#include "vqpde/opexpr.hpp"

namespace vqpde {

enum class Part { Real, Imag };

struct ShotMode {
  std::uint64_t shots = 100000;
  std::uint64_t seed = 0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Re or Im of <bra| op |ket>, with the coefficient of `op` included.
///
/// Exact mode (no ShotMode) contracts statevectors and works for any term.
/// Shot mode simulates the ancilla circuit H - controlled(U) - [S^dagger] - H
/// on the joint state, draws `shots` ancilla outcomes and returns
/// coeff * (2 k / shots - 1). Throws std::invalid_argument when the term
/// contains a Diag atom, since only unitary shift products have a circuit.
Estimate hadamard_test(const QuantumState& bra, const QuantumState& ket,
                       const OpTerm& op, const RegisterLayout& layout,
                       Part part, std::optional<ShotMode> shots = std::nullopt,
                       const FieldBindings& bindings = {});

/// Probability of measuring the ancilla in |0> for the test of a unit-coefficient
/// unitary term; (1 + Re or Im <bra|U|ket>) / 2.
double hadamard_ancilla_p0(const QuantumState& bra, const QuantumState& ket,
                           const OpTerm& op, const RegisterLayout& layout,
                           Part part);

}  // namespace vqpde
