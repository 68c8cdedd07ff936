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

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vqpde/ansatz.hpp"
#include "vqpde/hadamard.hpp"
#include "vqpde/opexpr.hpp"

namespace vqpde {

namespace pde {

struct NoPressure {};
/// Constant pressure gradient along x.
struct UniformGradient {
  double value = 0.0;
};
struct PressureField {
  std::vector<double> samples;
};
using PressureModel = std::variant<NoPressure, UniformGradient, PressureField>;

/// Evolves the velocity components vel_x, vel_y, vel_z (the first `dims` of
/// them). Derivatives act along every layout axis labelled x, y or z.
struct NavierStokes {
  double nu = 1.0;
  double rho = 1.0;
  double h = 1.0;
  PressureModel pressure = NoPressure{};
  std::size_t dims = 1;
};

/// T = m v_mu v_nu gamma |x - (x0 + speed t)|
struct PointParticle {
  double mass = 1.0;
  double v_mu = 0.1;
  double v_nu = 0.1;
  double speed = 0.1;
  double x0 = 0.0;
};
/// T = (rho_e + p / c^2) u_mu u_nu + p / g(x)
struct EquilibriumFluid {
  double rho_e = 1.0;
  double pressure = 0.1;
  double u_mu = 1.0;
  double u_nu = 1.0;
};
/// T = (F_mu_alpha F_nu_beta - invariant / 4) g(x) / mu0
struct Electromagnetic {
  double f_mu_alpha = 1.0;
  double f_nu_beta = 1.0;
  double invariant = 0.0;
  double mu0 = 1.0;
};
using StressEnergyModel = std::variant<PointParticle, EquilibriumFluid, Electromagnetic>;

/// Evolves one metric component "g" (indices j, m are labels only).
struct Einstein {
  StressEnergyModel tensor = PointParticle{};
  double G = 1.0;
  double c = 1.0;
  int j = 1;
  int m = 1;
  std::string axis_i;  // empty -> first layout axis
  std::string axis_n;
};

enum class MaxwellUpdate { B, E };

/// Fields E_x, E_y, E_z, B_x, B_y, B_z; one component is updated per step.
struct Maxwell {
  std::string component = "x";
  MaxwellUpdate which = MaxwellUpdate::B;
  double mu0 = 1.0;
  double eps0 = 1.0;
};

struct Boussinesq {
  double alpha = 1.0;
  double beta = 0.1;
};
struct LinTsien {};
struct CamassaHolm {
  double kappa = 1.0;
};
struct DSW {};
struct HunterSaxton {};

}  // namespace pde

using PdeProblem =
    std::variant<pde::NavierStokes, pde::Einstein, pde::Maxwell, pde::Boussinesq,
                 pde::LinTsien, pde::CamassaHolm, pde::DSW, pde::HunterSaxton>;

/// Field name -> samples on the flattened grid.
using FieldSet = FieldBindings;

/// levels[0] holds the fields at time t, levels[1] at t - tau.
struct History {
  double t = 0.0;
  std::vector<FieldSet> levels;
};

std::string pde_name(const PdeProblem& p);
/// Every state field of the problem, sorted.
std::vector<std::string> state_fields(const PdeProblem& p);
/// Groups of fields optimized together, in the order they are updated
/// within one step. Navier-Stokes: one group per component; DSW: {u, v}.
std::vector<std::vector<std::string>> update_groups(const PdeProblem& p);
/// Number of history levels a step needs (1 or 2).
std::size_t history_depth(const PdeProblem& p);
/// Throws std::invalid_argument for non-physical parameters.
void validate(const PdeProblem& p, const RegisterLayout& layout);

/// ||M c - sum_k E_k s_k||^2 for one candidate field.
struct Slot {
  std::string candidate;
  double weight = 1.0;
  OpExpr M;
  std::vector<std::pair<std::string, OpExpr>> sources;  // frozen tag -> E_k
};

/// Everything a cost needs before encoding: the residual structure, frozen
/// field samples by tag and Diag bindings.
struct CostSpec {
  std::vector<std::string> candidates;
  std::vector<Slot> slots;
  std::map<std::string, std::vector<double>> frozen;
  FieldBindings bindings;
};

struct FrozenState {
  QuantumState state;  // unit norm, or e_0 for a zero field
  double scale = 0.0;
};

/// One expectation term: Re(coeff * s_bra * s_ket * <bra|op|ket>), where a
/// tag "cand:<f>" refers to the candidate lambda0 |Psi> of field f and any
/// other tag to a frozen state with its scale. `op` has unit coefficient.
struct CostTerm {
  Complex coeff;
  std::string bra;
  OpTerm op;
  std::string ket;
};

std::string candidate_tag(const std::string& field);

/// Per-step cost, immutable after construction.
class CostFunction {
 public:
  CostFunction(RegisterLayout layout, CostSpec spec);

  const RegisterLayout& layout() const { return layout_; }
  const std::vector<std::string>& candidates() const { return spec_.candidates; }
  const std::vector<Slot>& slots() const { return spec_.slots; }
  const FieldBindings& bindings() const { return spec_.bindings; }
  const std::map<std::string, FrozenState>& frozen() const { return frozen_; }
  /// Sum of frozen-frozen terms.
  double offset() const { return offset_; }
  /// Canonical sum over slots of the candidate's weight * M^dagger M.
  const OpExpr& quadratic(std::size_t candidate) const { return quad_[candidate]; }
  /// sum over slots of weight * M^dagger (sum_k scale_k E_k s_k).
  const QuantumState& linear(std::size_t candidate) const { return lin_[candidate]; }

  /// Exact value for explicit candidate states (one per candidate, any norm
  /// absorbed into lambda0s).
  double evaluate_states(std::span<const QuantumState> states,
                         std::span<const double> lambda0s) const;
  /// Independent path: builds each residual vector and sums squared norms.
  double residual_norm_sq(std::span<const QuantumState> states,
                          std::span<const double> lambda0s) const;
  /// Sum over term list; reproduces evaluate_states.
  double term_sum(std::span<const QuantumState> states,
                  std::span<const double> lambda0s) const;

  /// Deterministic canonical ordering: quadratic, cross, then frozen terms,
  /// each sorted by (bra, ket, atoms).
  const std::vector<CostTerm>& terms() const { return terms_; }

  /// Quadratic and linear blocks for candidate `i` at state psi:
  /// Q = <psi|P|psi>, L = -2 Re<psi|W>; the cost is sum_i l0^2 Q_i + l0 L_i + offset.
  double quadratic_block(std::size_t i, const QuantumState& psi,
                         std::optional<ShotMode> mode = std::nullopt) const;
  double linear_block(std::size_t i, const QuantumState& psi,
                      std::optional<ShotMode> mode = std::nullopt) const;

 private:
  const QuantumState& state_for(const std::string& tag, std::span<const QuantumState> states,
                                std::span<const double> lambda0s, double& scale) const;

  RegisterLayout layout_;
  CostSpec spec_;
  std::map<std::string, FrozenState> frozen_;
  std::vector<OpExpr> quad_;
  std::vector<QuantumState> lin_;
  // cross terms per candidate, for shot scheduling: (tag, -2 w M^dagger E_k)
  std::vector<std::vector<std::pair<std::string, OpExpr>>> cross_;
  double offset_ = 0.0;
  std::vector<CostTerm> terms_;
};

/// Encodes a real field for use as a frozen state.
FrozenState encode_frozen(std::span<const double> samples, std::size_t n_qubits);

/// (h / tau)(1 + tau(-sum_a D(vel_a) grad_a + nu sum_a lap_a)) over the axes
/// x, y, z present in the layout; advection terms need the matching vel_a in
/// `frozen`, absent components drop out.
OpExpr build_q_operator(const pde::NavierStokes& problem, const FieldSet& frozen,
                        const RegisterLayout& layout, double tau);

/// Classical stress-energy samples for the Einstein source at time t, given
/// the current metric component g (used by the fluid and field models).
std::vector<double> stress_energy(const pde::Einstein& problem,
                                  const RegisterLayout& layout, double t,
                                  std::span<const double> g);

/// Residual structure for update group `group` (see update_groups). Throws
/// std::invalid_argument for too little history or unsupported layouts.
CostSpec build_cost_spec(const PdeProblem& problem, const History& history,
                         const RegisterLayout& layout, double tau,
                         std::size_t group = 0);

CostFunction build_cost(const PdeProblem& problem, const History& history,
                        const RegisterLayout& layout, double tau,
                        std::size_t group = 0);

/// Flattened optimizer vector: for each candidate, its angles then lambda0.
std::vector<double> pack_parameters(std::span<const VariationalState> states);
std::vector<VariationalState> unpack_parameters(std::span<const AnsatzSpec> specs,
                                                std::span<const double> x);

/// Cost at packed parameters. Shot mode estimates every unitary term with
/// the Hadamard test; the seed is combined with a hash of x so the value is a
/// pure function of its inputs.
double evaluate_cost(const CostFunction& cost, std::span<const AnsatzSpec> specs,
                     std::span<const double> x,
                     std::optional<ShotMode> mode = std::nullopt);
double evaluate_cost(const CostFunction& cost, std::span<const VariationalState> states,
                     std::optional<ShotMode> mode = std::nullopt);

/// Exact gradient in the packed layout via the parameter-shift rule for
/// angles and the analytic quadratic dependence for lambda0.
std::vector<double> parameter_shift_grad(const CostFunction& cost,
                                         std::span<const AnsatzSpec> specs,
                                         std::span<const double> x,
                                         std::optional<ShotMode> mode = std::nullopt);

std::vector<CostTerm> cost_term_list(const CostFunction& cost);

/// Plain-text dump, one term per line: "coeff | bra | atoms | ket".
std::string format_terms(const CostFunction& cost);

/// Small default instance used by `terms <pde>`, golden files and tests.
struct PdeInstance {
  std::string name;
  PdeProblem problem;
  RegisterLayout layout;
  History history;
  double tau = 0.01;
};

/// Names accepted by default_instance.
std::vector<std::string> instance_names();
PdeInstance default_instance(const std::string& name);

}  // namespace vqpde
