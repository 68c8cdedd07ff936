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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "vqpde/evolve.hpp"
#include "vqpde/oracle.hpp"

namespace vqpde {
namespace {

using testing::Gen;

AnsatzSpec full_spec(std::size_t n = 3) {
  AnsatzSpec s;
  s.n_qubits = n;
  s.layers = 6;
  return s;
}

opt::GradientDescent gd(std::size_t iters) {
  opt::GradientDescent g;
  g.max_iters = iters;
  return g;
}

std::vector<double> sine(std::size_t n, double amplitude = 1.0, double offset = 0.0) {
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = offset + amplitude * std::sin(2.0 * std::numbers::pi * double(j) / double(n));
  }
  return f;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

double sine_amplitude(const std::vector<double>& f) {
  const auto s = sine(f.size());
  double p = 0.0, n = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    p += f[j] * s[j];
    n += s[j] * s[j];
  }
  return p / n;
}

const RegisterLayout kLine = RegisterLayout::line("y", 3, 1.0);

TEST(Readout, ScalesRealPart) {
  const auto spec = full_spec();
  Gen g(301);
  VariationalState v{spec, g.angles(spec.parameter_count()), 0.0};
  for (double x : readout(v)) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(imaginary_leakage(v), 0.0);
  v.lambda0 = -2.5;
  const auto psi = prepare(spec, v.lambda);
  const auto r = readout(v);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(r[i], -2.5 * psi[i].real());
  EXPECT_LT(imaginary_leakage(v), 1e-15);
}

TEST(Readout, LeakageOfComplexAnsatz) {
  AnsatzSpec s;
  s.n_qubits = 1;
  s.rotation_axes = {RotationAxis::Y, RotationAxis::Z};
  // RY(pi/2) then RZ(pi/2): amplitudes e^{-i pi/4}/sqrt2, e^{i pi/4}/sqrt2
  const VariationalState v{s, {std::numbers::pi / 2, std::numbers::pi / 2}, 1.0};
  EXPECT_NEAR(imaginary_leakage(v), std::sqrt(0.5), 1e-12);
}

TEST(EncodeField, ZeroFieldHasZeroScale) {
  double ov = 0.0;
  const auto v = encode_field(full_spec(), std::vector<double>(8, 0.0), gd(10), 1, 0, &ov);
  EXPECT_EQ(v.lambda0, 0.0);
  EXPECT_EQ(ov, 1.0);
  EXPECT_THROW(encode_field(full_spec(), std::vector<double>(4, 1.0), gd(10)),
               std::invalid_argument);
}

TEST(Evolve, CouetteConstantIsFixedPoint) {
  EvolutionConfig cfg;
  cfg.tau = 0.1;
  cfg.n_steps = 5;
  AnsatzSpec s = full_spec();
  s.layers = 1;
  const auto tr = run(pde::NavierStokes{}, {{"vel_x", std::vector<double>(8, 0.4)}}, {{"*", s}},
                      cfg, kLine, gd(2000));
  ASSERT_FALSE(tr.error);
  ASSERT_EQ(tr.points.size(), 6u);
  for (const auto& p : tr.points) {
    for (double v : p.fields.at("vel_x")) EXPECT_NEAR(v, 0.4, 1e-5);
  }
}

TEST(Evolve, InviscidZeroFlowIsIdentity) {
  pde::NavierStokes p;
  p.nu = 0.0;
  EvolutionConfig cfg;
  cfg.n_steps = 3;
  const auto tr =
      run(p, {{"vel_x", std::vector<double>(8, 0.0)}}, {{"*", full_spec()}}, cfg, kLine, gd(10));
  ASSERT_FALSE(tr.error);
  for (const auto& pt : tr.points) {
    for (double v : pt.fields.at("vel_x")) EXPECT_EQ(v, 0.0);
  }
}

TEST(Evolve, SineOneStepMatchesOracle) {
  const auto f = sine(8, 1.0, 0.5);
  EvolutionConfig cfg;
  cfg.tau = 0.1;
  cfg.optimizer = gd(300);
  const auto tr = run(pde::NavierStokes{}, {{"vel_x", f}}, {{"*", full_spec()}}, cfg, kLine, gd(2000));
  ASSERT_FALSE(tr.error);
  ASSERT_EQ(tr.points.size(), 2u);
  const auto want = classical_step(pde::NavierStokes{}, History{0.0, {{{"vel_x", f}}}}, kLine, 0.1);
  EXPECT_LE(rel_l2(tr.points[1].fields.at("vel_x"), want.at("vel_x")), 1e-3);
  EXPECT_GE(tr.initial_overlap, 0.9999);
}

TEST(Evolve, SineModeDecaysMonotonically) {
  EvolutionConfig cfg;
  cfg.tau = 0.1;
  cfg.n_steps = 10;
  cfg.optimizer = gd(300);
  const auto tr =
      run(pde::NavierStokes{}, {{"vel_x", sine(8)}}, {{"*", full_spec()}}, cfg, kLine, gd(2000));
  ASSERT_FALSE(tr.error);
  double prev = sine_amplitude(tr.points[0].fields.at("vel_x"));
  for (std::size_t k = 1; k < tr.points.size(); ++k) {
    const double a = sine_amplitude(tr.points[k].fields.at("vel_x"));
    EXPECT_LT(a, prev) << k;
    EXPECT_GT(a, 0.0);
    prev = a;
  }
}

TEST(Evolve, StepNeverRaisesTheWarmCost) {
  const auto in = default_instance("couette");
  StateSet warm;
  warm["vel_x"] = encode_field(full_spec(), in.history.levels[0].at("vel_x"), gd(500));
  EvolutionConfig cfg;
  cfg.tau = in.tau;
  cfg.restarts = 3;
  const auto r = step(in.problem, in.history, warm, cfg, in.layout, 1);
  EXPECT_LE(r.cost, r.warm_cost);
  EXPECT_GE(r.cost, 0.0);
  EXPECT_GT(r.evaluations, 0u);
  EXPECT_TRUE(std::isfinite(r.grad_norm));
  EXPECT_EQ(r.fields.at("vel_x"), readout(r.states.at("vel_x")));
}

TEST(Evolve, DswTrajectoriesHaveEqualLength) {
  const auto layout = RegisterLayout::line("x", 3, 0.5);
  EvolutionConfig cfg;
  cfg.n_steps = 4;
  AnsatzSpec s = full_spec();
  s.layers = 3;
  const auto tr = run(pde::DSW{}, {{"u", sine(8, 0.3)}, {"v", sine(8, 0.2, 0.1)}}, {{"*", s}}, cfg,
                      layout, gd(500));
  ASSERT_FALSE(tr.error);
  ASSERT_EQ(tr.points.size(), 5u);
  for (const auto& p : tr.points) {
    ASSERT_TRUE(p.fields.count("u") && p.fields.count("v"));
    EXPECT_EQ(p.fields.at("u").size(), p.fields.at("v").size());
    for (const auto& [n, v] : p.fields) {
      for (double x : v) EXPECT_TRUE(std::isfinite(x));
    }
  }
}

TEST(Evolve, ZeroStepsReturnsInitialPoint) {
  EvolutionConfig cfg;
  cfg.n_steps = 0;
  const auto tr = run(pde::NavierStokes{}, {{"vel_x", sine(8)}}, {{"*", full_spec()}}, cfg, kLine,
                      gd(500));
  ASSERT_FALSE(tr.error);
  ASSERT_EQ(tr.points.size(), 1u);
  EXPECT_EQ(tr.points[0].t, 0.0);
}

TEST(Evolve, DeterministicPerSeed) {
  EvolutionConfig cfg;
  cfg.tau = 0.05;
  cfg.n_steps = 3;
  cfg.restarts = 2;
  cfg.optimizer = opt::SPSA{};
  cfg.seed = 11;
  auto once = [&] {
    return run(pde::NavierStokes{}, {{"vel_x", sine(8, 1.0, 0.2)}}, {{"*", full_spec()}}, cfg,
               kLine, opt::NelderMead{}, 2);
  };
  const auto a = once(), b = once();
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    EXPECT_EQ(a.points[k].fields, b.points[k].fields);
    EXPECT_EQ(a.points[k].cost, b.points[k].cost);
  }
}

TEST(Evolve, FailingStepKeepsPartialTrajectory) {
  const auto layout = RegisterLayout::line("x", 2, 0.5);
  AnsatzSpec s;
  s.n_qubits = 2;
  s.layers = 2;
  EvolutionConfig cfg;
  cfg.n_steps = 3;
  const double big = 1e200;
  const auto tr = run(pde::CamassaHolm{}, {{"u", {big, -big, 0.5 * big, 0.0}}}, {{"*", s}}, cfg,
                      layout, gd(200));
  ASSERT_TRUE(tr.error);
  EXPECT_EQ(tr.points.size(), 1u);
  EXPECT_NE(tr.error->find("step 1"), std::string::npos);
}

TEST(Evolve, Validation) {
  EvolutionConfig cfg;
  cfg.tau = -0.1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.tau = 0.1;
  cfg.restarts = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.restarts = 1;
  EXPECT_THROW(run(pde::NavierStokes{}, {}, {{"*", full_spec()}}, cfg, kLine, gd(10)),
               std::invalid_argument);
  EXPECT_THROW(run(pde::NavierStokes{}, {{"vel_x", sine(8)}}, {}, cfg, kLine, gd(10)),
               std::invalid_argument);
  EXPECT_EQ(evolved_fields(pde::DSW{}), (std::vector<std::string>{"u", "v"}));
}

}  // namespace
}  // namespace vqpde
