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

#include "vqpde/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "vqpde/oracle.hpp"

namespace vqpde {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return splitmix(splitmix(splitmix(seed ^ 0x5eedULL) + a) + b) + c;
}

// Sets every lambda0 in x to the minimizer of the cost at fixed angles; the
// cost is quadratic in each scale with no cross terms between candidates.
void refit_scales(const CostFunction& cost, std::span<const AnsatzSpec> specs,
                  std::vector<double>& x, const std::optional<ShotMode>& mode) {
  std::size_t off = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::size_t p = specs[i].parameter_count();
    const QuantumState psi =
        prepare(specs[i], std::span<const double>(x).subspan(off, p));
    const double q = cost.quadratic_block(i, psi, mode);
    const double l = cost.linear_block(i, psi, mode);
    if (q > 0.0 && std::isfinite(q) && std::isfinite(l)) x[off + p] = -l / (2.0 * q);
    off += p + 1;
  }
}

}  // namespace

void EvolutionConfig::validate() const {
  if (!(tau > 0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (shots && shots->shots < 1) throw std::invalid_argument("shots must be >= 1");
  vqpde::validate(optimizer);
}

std::vector<double> readout(const VariationalState& state) {
  const QuantumState psi = prepare(state.spec, state.lambda);
  std::vector<double> out(psi.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = state.lambda0 * psi[i].real();
  return out;
}

double imaginary_leakage(const VariationalState& state) {
  if (state.lambda0 == 0.0) return 0.0;
  const QuantumState psi = prepare(state.spec, state.lambda);
  double im = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) im += psi[i].imag() * psi[i].imag();
  return std::sqrt(im) / psi.norm();
}

std::vector<std::string> evolved_fields(const PdeProblem& problem) {
  std::set<std::string> out;
  for (const auto& g : update_groups(problem)) out.insert(g.begin(), g.end());
  return {out.begin(), out.end()};
}

StepResult step(const PdeProblem& problem, const History& history, const StateSet& warm,
                const EvolutionConfig& cfg, const RegisterLayout& layout,
                std::size_t step_index) {
  cfg.validate();
  if (history.levels.empty()) throw std::invalid_argument("empty history");
  StepResult res;
  res.states = warm;
  History h = history;
  double g2 = 0.0;
  const auto groups = update_groups(problem);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const CostFunction cost = build_cost(problem, h, layout, cfg.tau, gi);
    std::vector<AnsatzSpec> specs;
    std::vector<VariationalState> start;
    for (const auto& f : cost.candidates()) {
      auto it = warm.find(f);
      if (it == warm.end()) throw std::invalid_argument("no warm-start state for '" + f + "'");
      specs.push_back(it->second.spec);
      start.push_back(it->second);
    }
    std::optional<ShotMode> mode;
    if (cfg.shots) mode = ShotMode{cfg.shots->shots, derive(cfg.seed, step_index, gi)};

    Objective obj;
    obj.value = [&](std::span<const double> x) { return evaluate_cost(cost, specs, x, mode); };
    obj.gradient = [&](std::span<const double> x) {
      return parameter_shift_grad(cost, specs, x, mode);
    };

    const std::vector<double> x0 = pack_parameters(start);
    res.warm_cost += obj.value(x0);
    MinimizeOptions opts;
    opts.workers = cfg.workers;

    OptimizationTrace best;
    bool have = false;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
      std::vector<double> xs = x0;
      const std::uint64_t rs = derive(cfg.seed, step_index, gi, r + 1);
      if (r > 0) {
        std::mt19937_64 rng(rs);
        std::normal_distribution<double> n01(0.0, 0.1);
        std::size_t off = 0;
        for (const auto& s : specs) {
          for (std::size_t k = 0; k < s.parameter_count(); ++k) xs[off + k] += n01(rng);
          off += s.parameter_count() + 1;
        }
      }
      OptimizationTrace tr;
      try {
        refit_scales(cost, specs, xs, mode);
        tr = minimize(obj, xs, with_seed(cfg.optimizer, rs), opts);
      } catch (const std::domain_error& e) {
        throw StepFailure("step " + std::to_string(step_index) + ", group " +
                          std::to_string(gi) + ": " + e.what());
      }
      std::vector<double> polished = tr.x_best;
      refit_scales(cost, specs, polished, mode);
      const double fp = obj.value(polished);
      if (fp < tr.f_best) {
        tr.x_best = std::move(polished);
        tr.f_best = fp;
      }
      res.evaluations += tr.evaluations + 1;
      if (!have || tr.f_best < best.f_best) {
        best = std::move(tr);
        have = true;
      }
    }
    if (!std::isfinite(best.f_best)) {
      throw StepFailure("step " + std::to_string(step_index) + ", group " + std::to_string(gi) +
                        ": optimizer ended with non-finite cost");
    }
    res.cost += best.f_best;
    res.converged = res.converged && best.converged;
    for (double g : parameter_shift_grad(cost, specs, best.x_best)) g2 += g * g;

    const auto committed = unpack_parameters(specs, best.x_best);
    for (std::size_t c = 0; c < committed.size(); ++c) {
      const std::string& f = cost.candidates()[c];
      res.states[f] = committed[c];
      h.levels[0][f] = readout(committed[c]);
    }
  }
  res.grad_norm = std::sqrt(g2);
  res.fields = h.levels[0];
  return res;
}

VariationalState encode_field(const AnsatzSpec& spec, std::span<const double> samples,
                              const OptimizerConfig& fit_optimizer, std::size_t restarts,
                              std::uint64_t seed, double* overlap) {
  spec.validate();
  if (samples.size() != (std::size_t{1} << spec.n_qubits)) {
    throw std::invalid_argument("field length does not match the ansatz register");
  }
  VariationalState v{spec, std::vector<double>(spec.parameter_count(), 0.0), 0.0};
  if (std::all_of(samples.begin(), samples.end(), [](double v) { return v == 0.0; })) {
    if (overlap) *overlap = 1.0;
    return v;
  }
  const EncodedField enc = amplitude_encode(samples);
  const FitResult fit = fit_ansatz(spec, enc.state, fit_optimizer, restarts, seed);
  v.lambda = fit.lambda;
  const QuantumState psi = prepare(spec, v.lambda);
  double dot = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) dot += psi[i].real() * samples[i];
  v.lambda0 = dot;
  if (overlap) *overlap = fit.overlap;
  return v;
}

Trajectory run(const PdeProblem& problem, const FieldSet& initial,
               const std::map<std::string, AnsatzSpec>& specs, const EvolutionConfig& cfg,
               const RegisterLayout& layout, const OptimizerConfig& fit_optimizer,
               std::size_t fit_restarts) {
  EvolutionConfig checked = cfg;
  checked.n_steps = std::max<std::size_t>(1, cfg.n_steps);  // zero steps is allowed here
  checked.validate();
  validate(problem, layout);
  Trajectory traj;

  StateSet states;
  FieldSet fields = initial;
  for (const auto& f : evolved_fields(problem)) {
    auto it = initial.find(f);
    if (it == initial.end()) throw std::invalid_argument("initial condition missing field '" + f + "'");
    if (it->second.size() != layout.dim()) {
      throw std::invalid_argument("initial field '" + f + "' does not match the grid");
    }
    auto sp = specs.find(f);
    if (sp == specs.end()) sp = specs.find("*");
    if (sp == specs.end()) throw std::invalid_argument("no ansatz for field '" + f + "'");
    double ov = 1.0;
    states[f] = encode_field(sp->second, it->second, fit_optimizer, fit_restarts,
                             derive(cfg.seed, 0xf17ULL, std::hash<std::string>{}(f)), &ov);
    traj.initial_overlap = std::min(traj.initial_overlap, ov);
    fields[f] = readout(states[f]);
  }

  auto leak_check = [&](const StateSet& ss, std::size_t k) {
    for (const auto& [f, s] : ss) {
      const double leak = imaginary_leakage(s);
      if (leak > 1e-6) {
        traj.warnings.push_back("step " + std::to_string(k) + ": field '" + f +
                                "' imaginary leakage " + std::to_string(leak));
      }
    }
  };
  leak_check(states, 0);
  traj.points.push_back({0.0, fields, states, 0.0, 0.0, 0, true});

  History h = initial_history(problem, fields, layout, cfg.tau);
  for (std::size_t k = 1; k <= cfg.n_steps; ++k) {
    StepResult r;
    try {
      r = step(problem, h, states, cfg, layout, k);
    } catch (const std::exception& e) {
      traj.error = e.what();
      return traj;
    }
    states = r.states;
    h.levels.insert(h.levels.begin(), r.fields);
    h.levels.resize(history_depth(problem));
    h.t = static_cast<double>(k) * cfg.tau;
    leak_check(states, k);
    traj.points.push_back(
        {h.t, r.fields, states, r.cost, r.grad_norm, r.evaluations, r.converged});
  }
  return traj;
}

}  // namespace vqpde
