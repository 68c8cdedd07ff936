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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vqpde/optim.hpp"
#include "vqpde/statevec.hpp"

namespace vqpde {

enum class Entangler { ChainCNOT, RingCNOT, None };
enum class RotationAxis { Y, Z };

/// Layered hardware-efficient ansatz with an optional leading QFT block.
///
/// prepare() starts from |0...0>, applies the QFT over all qubits when
/// qft_block is set, then for each layer: one rotation per (qubit, axis) in
/// rotation_axes order, followed by the entangler. Parameters are ordered
/// layer-major, then qubit, then axis.
struct AnsatzSpec {
  std::size_t n_qubits = 1;
  std::size_t layers = 1;
  Entangler entangler = Entangler::ChainCNOT;
  bool qft_block = false;
  std::vector<RotationAxis> rotation_axes{RotationAxis::Y};

  std::size_t parameter_count() const {
    return layers * n_qubits * rotation_axes.size();
  }
  /// Throws std::invalid_argument when the spec has no parameters or repeats
  /// an axis.
  void validate() const;
  /// Short stable label, e.g. "L4-chain-Y" or "qft-L2-ring-YZ".
  std::string label() const;

  bool operator==(const AnsatzSpec&) const = default;
};

std::string to_string(Entangler e);
Entangler entangler_from_string(const std::string& s);

/// |f> = lambda0 |Psi(lambda)>
struct VariationalState {
  AnsatzSpec spec;
  std::vector<double> lambda;
  double lambda0 = 0.0;
};

QuantumState prepare(const AnsatzSpec& spec, std::span<const double> lambda);

struct EncodedField {
  QuantumState state;  // unit norm
  double lambda0 = 0.0;
};

/// lambda0 = ||samples||, state = samples / lambda0. Throws
/// std::invalid_argument for an all-zero or non power-of-two input.
EncodedField amplitude_encode(std::span<const double> samples);

/// Parameter-shift derivative of a quadratic expectation <Psi|M|Psi>:
/// [E(theta + pi/2) - E(theta - pi/2)] / 2 per parameter.
std::vector<double> shift_gradient_quadratic(
    const AnsatzSpec& spec, std::span<const double> lambda,
    const std::function<double(const QuantumState&)>& expectation);

/// Parameter-shift derivative of a linear functional Re<Psi|w>, whose
/// dependence on each angle has frequency 1/2: [L(theta + pi) - L(theta - pi)] / 4.
std::vector<double> shift_gradient_linear(
    const AnsatzSpec& spec, std::span<const double> lambda,
    const std::function<double(const QuantumState&)>& functional);

struct FitResult {
  std::vector<double> lambda;
  double overlap = 0.0;  // |<target|Psi(lambda)>|
  OptimizationTrace trace;
};

/// Maximizes |<target|Psi(lambda)>| by minimizing 1 - |<target|Psi>|^2 with
/// parameter-shift gradients. The first start is lambda = start (or zeros);
/// extra restarts draw uniform angles in [-pi, pi) from `seed`.
FitResult fit_ansatz(const AnsatzSpec& spec, const QuantumState& target,
                     const OptimizerConfig& optimizer, std::size_t restarts = 1,
                     std::uint64_t seed = 0, std::span<const double> start = {});

}  // namespace vqpde
