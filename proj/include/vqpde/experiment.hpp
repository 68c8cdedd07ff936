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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vqpde/evolve.hpp"
#include "vqpde/oracle.hpp"

namespace vqpde {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; the message starts with the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& msg)
      : std::invalid_argument(path + ": " + msg) {}
};

struct NamedReference {
  std::string field;
  ReferenceSolution solution;
};

struct ExperimentConfig {
  nlohmann::json raw;  // as parsed, used for the manifest and config hash
  PdeProblem problem;
  RegisterLayout layout;
  FieldSet initial;
  std::vector<AnsatzSpec> ansatz;  // one entry unless swept
  std::vector<OptimizerConfig> optimizers;
  std::vector<double> taus;
  EvolutionConfig evolution;  // tau and optimizer are overridden per run
  OptimizerConfig fit_optimizer = opt::NelderMead{};
  std::size_t fit_restarts = 2;
  std::uint64_t seed = 0;
  std::string output = "out";
  std::map<std::string, NamedReference> references;

  std::size_t run_count() const { return ansatz.size() * optimizers.size() * taus.size(); }
  bool is_sweep() const { return run_count() > 1; }
};

/// Parses and validates; throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Accepts the canonical names ("gradient_descent", "spsa", "nelder_mead",
/// "cmaes", "particle_swarm", "differential_evolution") and the aliases
/// listed in the README.
OptimizerConfig parse_optimizer(const nlohmann::json& j, const std::string& path = "optimizer");
std::string canonical_optimizer_name(const std::string& name);

PdeProblem parse_problem(const nlohmann::json& j, const RegisterLayout& layout,
                         const std::string& path = "problem");
ReferenceSolution parse_reference(const nlohmann::json& j, const std::string& path);

/// CSV rows for one trajectory. Columns: step, t, field, index, one column
/// per grid axis, value, cost, grad_norm.
void write_trajectory_csv(std::ostream& out, const RegisterLayout& layout,
                          const std::vector<double>& times, const std::vector<FieldSet>& fields,
                          const std::vector<double>& costs, const std::vector<double>& grad_norms);
void write_errors_csv(std::ostream& out, const std::vector<double>& times,
                      const std::map<std::string, ErrorMetrics>& metrics);

struct LoadedTrajectory {
  std::vector<double> times;
  std::vector<FieldSet> fields;
};
LoadedTrajectory read_trajectory_csv(const std::filesystem::path& path);

/// Runs every member of the experiment, writing into cfg.output. Returns the
/// process exit status (0 ok, 1 if any run failed).
int run_experiment(const ExperimentConfig& cfg, std::ostream& log, std::size_t workers = 1);

/// `against` is "oracle" or "exact:<reference name>". Writes
/// compare_<tag>.csv next to each trajectory and prints a summary. Throws
/// std::runtime_error for a missing manifest or grid mismatch.
void compare_run(const std::filesystem::path& dir, const std::string& against,
                 std::ostream& log);

/// Worker count from VQPDE_WORKERS (default 1).
std::size_t workers_from_env();

/// 64-bit FNV-1a of the string, as 16 hex digits.
std::string fnv1a_hex(const std::string& s);

}  // namespace vqpde
