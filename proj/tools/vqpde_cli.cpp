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

// vqpde command line: run, compare, terms, validate.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vqpde/costlib.hpp"
#include "vqpde/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational PDE time evolution on a simulated quantum register"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vqpde::kVersion);

  std::string config_path, output_override;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->add_option("-o,--output", output_override, "Override the output directory");

  std::string dir, against = "oracle";
  auto* compare = app.add_subcommand("compare", "Compare a finished run against a reference");
  compare->add_option("dir", dir, "Run directory containing manifest.json")->required();
  compare->add_option("--against", against, "oracle or exact:<reference name>");

  std::string pde;
  auto* terms = app.add_subcommand("terms", "Print the cost term list of a default instance");
  terms->add_option("pde", pde, "Instance name")
      ->required()
      ->check(CLI::IsMember(vqpde::instance_names()));

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run || *validate) {
      vqpde::ExperimentConfig cfg;
      try {
        cfg = vqpde::load_config(config_path);
      } catch (const vqpde::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kConfigError;
      }
      if (*validate) {
        std::cout << "ok: " << vqpde::pde_name(cfg.problem) << ", " << cfg.layout.dim()
                  << " grid points, " << cfg.run_count() << " run(s)\n";
        return kOk;
      }
      if (!output_override.empty()) cfg.output = output_override;
      return vqpde::run_experiment(cfg, std::cout, vqpde::workers_from_env());
    }
    if (*compare) {
      vqpde::compare_run(dir, against, std::cout);
      return kOk;
    }
    if (*terms) {
      const auto inst = vqpde::default_instance(pde);
      std::size_t groups = vqpde::update_groups(inst.problem).size();
      for (std::size_t g = 0; g < groups; ++g) {
        const auto cost = vqpde::build_cost(inst.problem, inst.history, inst.layout, inst.tau, g);
        if (groups > 1) std::cout << "# group " << g << '\n';
        std::cout << vqpde::format_terms(cost);
      }
      return kOk;
    }
  } catch (const vqpde::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
