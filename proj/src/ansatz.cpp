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

#include "vqpde/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace vqpde {

void AnsatzSpec::validate() const {
  if (n_qubits == 0) throw std::invalid_argument("ansatz needs at least one qubit");
  if (layers == 0) throw std::invalid_argument("ansatz.layers must be >= 1");
  if (rotation_axes.empty()) throw std::invalid_argument("ansatz.rotations is empty");
  if (rotation_axes.size() == 2 && rotation_axes[0] == rotation_axes[1]) {
    throw std::invalid_argument("ansatz.rotations repeats an axis");
  }
  if (rotation_axes.size() > 2) throw std::invalid_argument("ansatz.rotations has too many axes");
}

std::string to_string(Entangler e) {
  switch (e) {
    case Entangler::ChainCNOT: return "chain";
    case Entangler::RingCNOT: return "ring";
    case Entangler::None: return "none";
  }
  return "none";
}

Entangler entangler_from_string(const std::string& s) {
  if (s == "chain") return Entangler::ChainCNOT;
  if (s == "ring") return Entangler::RingCNOT;
  if (s == "none") return Entangler::None;
  throw std::invalid_argument("unknown entangler '" + s + "' (chain, ring, none)");
}

std::string AnsatzSpec::label() const {
  std::string s = qft_block ? "qft-" : "";
  s += "L" + std::to_string(layers) + "-" + to_string(entangler) + "-";
  for (auto a : rotation_axes) s += a == RotationAxis::Y ? "Y" : "Z";
  return s;
}

QuantumState prepare(const AnsatzSpec& spec, std::span<const double> lambda) {
  spec.validate();
  if (lambda.size() != spec.parameter_count()) {
    throw std::invalid_argument("ansatz expects " + std::to_string(spec.parameter_count()) +
                                " parameters, got " + std::to_string(lambda.size()));
  }
  const std::size_t n = spec.n_qubits;
  QuantumState s(n);
  if (spec.qft_block) s = apply_qft(s, 0, n);
  std::size_t k = 0;
  for (std::size_t layer = 0; layer < spec.layers; ++layer) {
    for (std::size_t q = 0; q < n; ++q) {
      for (auto axis : spec.rotation_axes) {
        const double theta = lambda[k++];
        if (axis == RotationAxis::Y) {
          s = apply_gate(s, gate::RY{theta}, {q});
        } else {
          s = apply_gate(s, gate::RZ{theta}, {q});
        }
      }
    }
    if (n > 1 && spec.entangler != Entangler::None) {
      for (std::size_t q = 0; q + 1 < n; ++q) {
        s = apply_gate(s, gate::ControlledNot{}, {q, q + 1});
      }
      if (spec.entangler == Entangler::RingCNOT && n > 2) {
        s = apply_gate(s, gate::ControlledNot{}, {n - 1, 0});
      }
    }
  }
  return s;
}

EncodedField amplitude_encode(std::span<const double> samples) {
  double peak = 0.0;
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("field samples must be finite");
    peak = std::max(peak, std::abs(v));
  }
  if (peak == 0.0) throw std::invalid_argument("cannot encode an all-zero field");
  // scale by the peak first so huge samples do not overflow the sum of squares
  double ss = 0.0;
  for (double v : samples) ss += (v / peak) * (v / peak);
  const double unit_norm = std::sqrt(ss);
  std::vector<double> unit(samples.begin(), samples.end());
  for (auto& v : unit) v = (v / peak) / unit_norm;
  return {QuantumState::from_real(unit), peak * unit_norm};
}

namespace {

std::vector<double> shift_rule(const AnsatzSpec& spec, std::span<const double> lambda,
                               const std::function<double(const QuantumState&)>& f,
                               double shift, double denom) {
  std::vector<double> x(lambda.begin(), lambda.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + shift;
    const double fp = f(prepare(spec, x));
    x[i] = xi - shift;
    const double fm = f(prepare(spec, x));
    x[i] = xi;
    g[i] = (fp - fm) / denom;
  }
  return g;
}

}  // namespace

std::vector<double> shift_gradient_quadratic(
    const AnsatzSpec& spec, std::span<const double> lambda,
    const std::function<double(const QuantumState&)>& expectation) {
  return shift_rule(spec, lambda, expectation, std::numbers::pi / 2, 2.0);
}

std::vector<double> shift_gradient_linear(
    const AnsatzSpec& spec, std::span<const double> lambda,
    const std::function<double(const QuantumState&)>& functional) {
  return shift_rule(spec, lambda, functional, std::numbers::pi, 4.0);
}

FitResult fit_ansatz(const AnsatzSpec& spec, const QuantumState& target,
                     const OptimizerConfig& optimizer, std::size_t restarts,
                     std::uint64_t seed, std::span<const double> start) {
  spec.validate();
  if (target.n_qubits() != spec.n_qubits) {
    throw std::invalid_argument("fit target size does not match the ansatz");
  }
  const double tn = target.norm();
  if (tn == 0.0) throw std::invalid_argument("fit target is the zero state");
  const QuantumState t = target.scaled(1.0 / tn);
  auto fidelity = [&](const QuantumState& psi) { return std::norm(inner(t, psi)); };
  Objective obj;
  obj.value = [&](std::span<const double> x) { return 1.0 - fidelity(prepare(spec, x)); };
  obj.gradient = [&](std::span<const double> x) {
    auto g = shift_gradient_quadratic(spec, x, fidelity);
    for (auto& v : g) v = -v;
    return g;
  };

  const std::size_t p = spec.parameter_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  FitResult best;
  best.overlap = -1.0;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    std::vector<double> x0(p, 0.0);
    if (r == 0 && start.size() == p) {
      x0.assign(start.begin(), start.end());
    } else if (r > 0 || fidelity(prepare(spec, x0)) < 1e-12) {
      // zero angles give |0...0>, a stationary point when the target misses it
      for (auto& v : x0) v = angle(rng);
    }
    OptimizationTrace tr = minimize(obj, x0, with_seed(optimizer, seed + r));
    const double ov = std::sqrt(std::max(0.0, 1.0 - tr.f_best));
    if (ov > best.overlap) {
      best.lambda = tr.x_best;
      best.overlap = std::min(1.0, ov);
      best.trace = std::move(tr);
    }
    if (best.overlap >= 1.0 - 1e-12) break;
  }
  return best;
}

}  // namespace vqpde
