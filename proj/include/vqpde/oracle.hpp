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

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vqpde/costlib.hpp"

namespace vqpde {

namespace ref {

/// v_x = A exp[c (alpha x + beta y) / (nu (alpha^2 + beta^2))] + B,
/// v_y = (c - alpha v_x) / beta. Steady under uniform pressure.
struct NsExponential {
  double A = 1.0;
  double B = 0.0;
  double c = 1.0;
  double nu = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  int component = 0;  // 0 -> v_x, 1 -> v_y
};
/// u = U y / H
struct CouetteSteady {
  double U = 1.0;
  double H = 1.0;
};
/// amplitude * sech((x - center) / width), or tanh when use_tanh.
struct SechTanh {
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
  bool use_tanh = false;
};
/// amplitude * exp(-decay t) * sin(wavenumber x + phase)
struct Sinusoid {
  double amplitude = 1.0;
  double wavenumber = 1.0;
  double phase = 0.0;
  double decay = 0.0;
};
struct LinearNegativeSlope {
  double slope = -1.0;
  double intercept = 0.0;
};

}  // namespace ref

using ReferenceSolution = std::variant<ref::NsExponential, ref::CouetteSteady, ref::SechTanh,
                                       ref::Sinusoid, ref::LinearNegativeSlope>;

std::string reference_kind(const ReferenceSolution& r);

/// x holds one coordinate per grid axis (first axis is "x" for the
/// one-dimensional profiles). Throws std::invalid_argument for singular
/// parameter combinations.
double exact_eval(const ReferenceSolution& r, std::span<const double> x, double t);
std::vector<double> exact_field(const ReferenceSolution& r, const RegisterLayout& layout,
                                double t);

/// Implicit system the classical step could not solve reliably.
class SingularSystem : public std::runtime_error {
 public:
  SingularSystem(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// One explicit-Euler step (with the implicit left-hand sides solved densely)
/// on the same periodic stencils as the cost functions. Returns all state
/// fields at t + tau; fields the problem does not evolve are copied.
FieldSet classical_step(const PdeProblem& problem, const History& history,
                        const RegisterLayout& layout, double tau);

/// History at t = 0 from the initial fields: adds the t - tau level for
/// second-order problems (zero initial velocity).
History initial_history(const PdeProblem& problem, const FieldSet& initial,
                        const RegisterLayout& layout, double tau);

struct ClassicalTrajectory {
  std::vector<double> times;
  std::vector<FieldSet> fields;  // n_steps + 1 entries
};

ClassicalTrajectory run_classical(const PdeProblem& problem, const FieldSet& initial,
                                  const RegisterLayout& layout, double tau,
                                  std::size_t n_steps);

struct ErrorMetrics {
  std::vector<double> rel_l2;
  std::vector<double> linf;
  std::vector<bool> guarded;  // reference norm below 1e-12
};

/// Per step ||a - r|| / max(||r||, 1e-12) and max |a - r|. Throws on length
/// or grid mismatch.
ErrorMetrics l2_error(const std::vector<std::vector<double>>& approx,
                      const std::vector<std::vector<double>>& reference);

/// Max-abs residual of the steady x-momentum equation with zero pressure
/// gradient at interior points of an n x n grid of spacing length / n, using
/// the forward-difference gradient and symmetric Laplacian. When `swap_grouping`
/// is set the exponent uses c (alpha^2 + beta^2) / nu instead.
double ns_exponential_residual(const ref::NsExponential& r, std::size_t n, double length,
                               bool swap_grouping = false);

}  // namespace vqpde
