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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vqpde {

using ScalarFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

/// The value function must be pure: population methods may call it from
/// several threads at once.
struct Objective {
  ScalarFn value;
  GradientFn gradient;  // optional; central differences when empty
};

namespace opt {

/// Steepest descent with Barzilai-Borwein step lengths and Armijo backtracking.
struct GradientDescent {
  double step = 0.1;  // first trial step
  std::size_t max_iters = 200;
  double grad_tol = 1e-8;
  double f_tol = 1e-10;
};

struct SPSA {
  double a = 0.2;
  double c = 0.1;
  double alpha = 0.602;
  double gamma = 0.101;
  double stability = 10.0;  // the "A" offset in a / (k + 1 + A)^alpha
  std::size_t max_iters = 1000;
  double f_tol = 1e-10;
  std::uint64_t seed = 0;
};

struct NelderMead {
  double scale = 0.5;  // initial simplex edge
  std::size_t max_iters = 5000;
  double f_tol = 1e-10;
};

struct CMAES {
  std::size_t population = 0;  // 0 -> 4 + floor(3 ln n)
  double sigma0 = 0.5;
  std::size_t max_iters = 2000;
  std::size_t max_evals = 0;  // 0 -> unlimited
  double f_tol = 1e-10;
  std::uint64_t seed = 0;
};

struct ParticleSwarm {
  std::size_t particles = 30;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  double spread = 1.0;  // initial positions x0 +- spread
  std::size_t max_iters = 500;
  double f_tol = 1e-10;
  std::uint64_t seed = 0;
};

/// rand/1/bin
struct DifferentialEvolution {
  std::size_t population = 20;
  double F = 0.7;
  double CR = 0.9;
  double spread = 1.0;
  std::size_t max_iters = 1000;
  double f_tol = 1e-10;
  std::uint64_t seed = 0;
};

}  // namespace opt

using OptimizerConfig =
    std::variant<opt::GradientDescent, opt::SPSA, opt::NelderMead, opt::CMAES,
                 opt::ParticleSwarm, opt::DifferentialEvolution>;

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct MinimizeOptions {
  std::optional<Bounds> bounds;
  std::size_t workers = 1;  // concurrent evaluations for population methods
};

struct OptimizationTrace {
  std::string method;
  std::vector<double> best_values;  // best-so-far after each iteration (index 0 = start)
  std::size_t evaluations = 0;
  std::vector<double> x_best;
  double f_best = 0.0;
  bool converged = false;
};

/// Throws std::domain_error if the objective is non-finite at x0 and
/// std::invalid_argument for malformed configs. Non-finite values met later
/// are treated as +inf.
OptimizationTrace minimize(const Objective& objective, std::span<const double> x0,
                           const OptimizerConfig& config,
                           const MinimizeOptions& options = {});

/// Central differences with step h per coordinate.
std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> x,
                                     double h = 1e-5);

std::string optimizer_name(const OptimizerConfig& config);

/// Throws std::invalid_argument naming the offending field.
void validate(const OptimizerConfig& config);

/// Returns a copy with every seed field replaced.
OptimizerConfig with_seed(const OptimizerConfig& config, std::uint64_t seed);

}  // namespace vqpde
