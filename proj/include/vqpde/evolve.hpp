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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqpde/ansatz.hpp"
#include "vqpde/costlib.hpp"
#include "vqpde/optim.hpp"

namespace vqpde {

struct EvolutionConfig {
  double tau = 0.01;
  std::size_t n_steps = 1;
  OptimizerConfig optimizer = opt::GradientDescent{};
  std::size_t restarts = 1;
  std::optional<ShotMode> shots;  // nullopt -> exact expectation values
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

/// Variational state per evolved field.
using StateSet = std::map<std::string, VariationalState>;

/// lambda0 * Re(amplitudes).
std::vector<double> readout(const VariationalState& state);
/// ||Im(lambda0 amplitudes)|| / ||lambda0 amplitudes||; 0 for a zero field.
double imaginary_leakage(const VariationalState& state);

/// Non-finite cost or optimizer failure inside a step.
class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepResult {
  StateSet states;  // every evolved field, committed
  FieldSet fields;  // readout, plus non-evolved fields carried over
  double cost = 0.0;  // sum over update groups
  double warm_cost = 0.0;  // cost at the warm start, same groups
  double grad_norm = 0.0;  // parameter-shift gradient at the committed point
  std::size_t evaluations = 0;
  bool converged = true;
};

/// One time step: for each update group builds the cost from `history`
/// (with levels[0] refreshed by groups already updated in this step),
/// minimizes from `warm` plus restarts-1 perturbed starts and commits the best.
StepResult step(const PdeProblem& problem, const History& history, const StateSet& warm,
                const EvolutionConfig& cfg, const RegisterLayout& layout,
                std::size_t step_index = 0);

struct TrajectoryPoint {
  double t = 0.0;
  FieldSet fields;
  StateSet states;
  double cost = 0.0;
  double grad_norm = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;  // n_steps + 1 on success
  std::vector<std::string> warnings;
  std::optional<std::string> error;  // set when a step failed; points are partial
  double initial_overlap = 1.0;  // worst fit overlap over evolved fields
};

/// Fits `spec` to a real field; lambda0 = Re<Psi|f> so a perfect fit
/// reproduces f exactly.
VariationalState encode_field(const AnsatzSpec& spec, std::span<const double> samples,
                              const OptimizerConfig& fit_optimizer, std::size_t restarts = 1,
                              std::uint64_t seed = 0, double* overlap = nullptr);

/// Fits every evolved field of `initial` with its spec (the entry "*" is the
/// default), then applies `step` n_steps times. A failing step ends the run
/// with the partial trajectory and `error` set.
Trajectory run(const PdeProblem& problem, const FieldSet& initial,
               const std::map<std::string, AnsatzSpec>& specs, const EvolutionConfig& cfg,
               const RegisterLayout& layout, const OptimizerConfig& fit_optimizer,
               std::size_t fit_restarts = 1);

/// Fields the variational loop evolves, sorted.
std::vector<std::string> evolved_fields(const PdeProblem& problem);

}  // namespace vqpde
