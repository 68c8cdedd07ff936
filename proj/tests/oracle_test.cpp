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

#include "residuals.hpp"
#include "vqpde/oracle.hpp"

namespace vqpde {
namespace {

using testing::Gen;

TEST(ClassicalStep, CouetteDelta) {
  pde::NavierStokes p;
  const auto layout = RegisterLayout::line("y", 2, 1.0);
  const History h{0.0, {{{"vel_x", {0.0, 1.0, 0.0, 0.0}}}}};
  const auto next = classical_step(p, h, layout, 0.1).at("vel_x");
  const std::vector<double> want{0.1, 0.8, 0.1, 0.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(next[i], want[i], 1e-15);
}

TEST(ClassicalStep, SineModeDecaysByCirculantFactor) {
  const std::size_t n = 16;
  const double d = 0.25, tau = 0.01, nu = 0.7;
  const auto layout = RegisterLayout::line("y", 4, d);
  pde::NavierStokes p;
  p.nu = nu;
  std::vector<double> f(n);
  const double k = 2.0 * std::numbers::pi / (double(n) * d);
  for (std::size_t j = 0; j < n; ++j) f[j] = std::sin(k * double(j) * d);
  const double factor = 1.0 - 2.0 * nu * tau * (1.0 - std::cos(k * d)) / (d * d);
  const auto traj = run_classical(p, {{"vel_x", f}}, layout, tau, 5);
  ASSERT_EQ(traj.fields.size(), 6u);
  for (std::size_t s = 0; s < 6; ++s) {
    EXPECT_NEAR(traj.times[s], double(s) * tau, 1e-15);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_NEAR(traj.fields[s].at("vel_x")[j], std::pow(factor, double(s)) * f[j], 1e-12);
    }
  }
}

class EveryPde : public ::testing::TestWithParam<std::string> {};

TEST_P(EveryPde, StepZeroesTheCost) {
  const auto in = default_instance(GetParam());
  const auto next = classical_step(in.problem, in.history, in.layout, in.tau);
  // groups see the fields already updated in this step
  History h = in.history;
  for (std::size_t grp = 0; grp < update_groups(in.problem).size(); ++grp) {
    const auto cost = build_cost(in.problem, h, in.layout, in.tau, grp);
    std::vector<QuantumState> states;
    std::vector<double> l0;
    for (const auto& c : cost.candidates()) {
      const auto enc = amplitude_encode(next.at(c));
      states.push_back(enc.state);
      l0.push_back(enc.lambda0);
    }
    const double v = cost.evaluate_states(states, l0);
    // a singular left side leaves the part of b outside its range
    double floor = 0.0;
    for (const auto& sl : testing::dense_slots(in.problem, h, in.layout, in.tau, grp)) {
      const Eigen::VectorXd c = sl.M.completeOrthogonalDecomposition().solve(sl.b);
      floor += (sl.M * c - sl.b).squaredNorm();
    }
    EXPECT_LE(v, floor + 1e-10) << GetParam() << " group " << grp;
    for (const auto& c : cost.candidates()) h.levels[0][c] = next.at(c);
  }
  for (const auto& f : state_fields(in.problem)) {
    ASSERT_TRUE(next.count(f)) << f;
    for (double v : next.at(f)) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST_P(EveryPde, ZeroFieldStaysZero) {
  const auto in = default_instance(GetParam());
  if (std::holds_alternative<pde::Einstein>(in.problem)) {
    GTEST_SKIP() << "source term does not vanish with the field";
  }
  auto problem = in.problem;
  if (auto* ns = std::get_if<pde::NavierStokes>(&problem)) ns->pressure = pde::NoPressure{};
  History h = in.history;
  for (auto& level : h.levels) {
    for (auto& [name, v] : level) std::fill(v.begin(), v.end(), 0.0);
  }
  const auto next = classical_step(problem, h, in.layout, in.tau);
  for (const auto& [name, v] : next) {
    for (double x : v) EXPECT_EQ(x, 0.0) << name;
  }
}

INSTANTIATE_TEST_SUITE_P(Oracle, EveryPde, ::testing::ValuesIn(instance_names()));

TEST(ClassicalStep, MeanPreservingGaugeForSingularLeftSide) {
  for (const char* name : {"lin_tsien", "hunter_saxton"}) {
    const auto in = default_instance(name);
    const auto next = classical_step(in.problem, in.history, in.layout, in.tau);
    const auto& cur = in.history.levels[0].at("u");
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      a += cur[i];
      b += next.at("u")[i];
    }
    EXPECT_NEAR(a, b, 1e-12) << name;
  }
}

TEST(ClassicalStep, ConstantFieldIsFixedForPressureFreeNavierStokes) {
  pde::NavierStokes p;
  p.dims = 2;
  const RegisterLayout layout({{"x", 2, 0.5}, {"y", 2, 0.5}});
  const FieldSet f{{"vel_x", std::vector<double>(16, 0.3)}, {"vel_y", std::vector<double>(16, -1.2)}};
  const auto next = classical_step(p, History{0.0, {f}}, layout, 0.05);
  for (const auto& [name, v] : f) {
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(next.at(name)[i], v[i], 1e-14);
  }
}

TEST(ClassicalStep, NoViscosityNoFlowIsIdentity) {
  pde::NavierStokes p;
  p.nu = 0.0;
  const auto layout = RegisterLayout::line("y", 3, 1.0);
  Gen g(202);
  const auto f = g.field(8);
  const auto next = classical_step(p, History{0.0, {{{"vel_x", f}}}}, layout, 0.3);
  EXPECT_EQ(next.at("vel_x"), f);
}

TEST(ClassicalStep, SingularBoussinesqThrows) {
  // 1 - beta L has a zero eigenvalue on the highest mode when beta = -d^2 / 4
  const double d = 0.5;
  pde::Boussinesq p;
  p.beta = -d * d / 4.0;
  const auto layout = RegisterLayout::line("x", 3, d);
  Gen g(203);
  const History h{0.0, {{{"u", g.field(8)}}, {{"u", g.field(8)}}}};
  try {
    classical_step(p, h, layout, 0.01);
    FAIL() << "expected SingularSystem";
  } catch (const SingularSystem& e) {
    EXPECT_GT(e.condition(), 1e12);
  }
}

TEST(InitialHistory, BoussinesqBootstrapOnlyWhereNeeded) {
  const auto layout = RegisterLayout::line("x", 3, 0.5);
  Gen g(204);
  const FieldSet f{{"u", g.field(8)}};
  EXPECT_EQ(initial_history(pde::Boussinesq{}, f, layout, 0.01).levels.size(), 2u);
  EXPECT_EQ(initial_history(pde::CamassaHolm{}, f, layout, 0.01).levels.size(), 1u);
  // zero velocity: the backward level differs from u(0) only at O(tau^2)
  const auto h = initial_history(pde::Boussinesq{}, f, layout, 1e-3);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(h.levels[1].at("u")[i], f.at("u")[i], 1e-4);
}

TEST(Reference, NsExponentialPointMatchesLongDouble) {
  ref::NsExponential r{0.7, -0.2, 0.9, 0.35, 1.3, -0.6, 0};
  const std::vector<double> x{0.41, 0.73};
  const long double s2 = 1.3L * 1.3L + 0.6L * 0.6L;
  const long double e = 0.9L * (1.3L * 0.41L - 0.6L * 0.73L) / (0.35L * s2);
  const long double vx = 0.7L * std::exp(e) - 0.2L;
  EXPECT_NEAR(exact_eval(r, x, 0.0), static_cast<double>(vx), 1e-14);
  r.component = 1;
  EXPECT_NEAR(exact_eval(r, x, 0.0), static_cast<double>((0.9L - 1.3L * vx) / -0.6L), 1e-13);
  r.A = 0.0;
  r.component = 0;
  EXPECT_EQ(exact_eval(r, x, 0.0), -0.2);
  EXPECT_EQ(exact_eval(r, std::vector<double>{5.0, -3.0}, 2.0), -0.2);
  r.alpha = r.beta = 0.0;
  EXPECT_THROW(exact_eval(r, x, 0.0), std::invalid_argument);
}

TEST(Reference, NsExponentialStationarity) {
  ref::NsExponential r;
  r.c = 0.01;
  const double r32 = ns_exponential_residual(r, 32, 1.0);
  EXPECT_LE(r32, 1e-8);
  // first order: halving the spacing roughly halves the residual
  const double r64 = ns_exponential_residual(r, 64, 1.0);
  const double r128 = ns_exponential_residual(r, 128, 1.0);
  EXPECT_NEAR(r32 / r64, 2.0, 0.2);
  EXPECT_NEAR(r64 / r128, 2.0, 0.2);
  EXPECT_GT(ns_exponential_residual(r, 32, 1.0, true), 1e3 * r32);
}

TEST(Reference, OtherProfiles) {
  const std::vector<double> x{0.5};
  EXPECT_DOUBLE_EQ(exact_eval(ref::CouetteSteady{2.0, 4.0}, x, 0.0), 0.25);
  EXPECT_DOUBLE_EQ(exact_eval(ref::SechTanh{2.0, 0.5, 0.5, false}, x, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(exact_eval(ref::SechTanh{2.0, 0.5, 0.0, true}, x, 0.0), 2.0 * std::tanh(1.0));
  EXPECT_DOUBLE_EQ(exact_eval(ref::Sinusoid{1.0, std::numbers::pi, 0.0, 2.0}, x, 1.0), std::exp(-2.0));
  EXPECT_DOUBLE_EQ(exact_eval(ref::LinearNegativeSlope{-2.0, 1.0}, x, 0.0), 0.0);
  EXPECT_THROW(exact_eval(ref::CouetteSteady{1.0, 0.0}, x, 0.0), std::invalid_argument);
  EXPECT_THROW(exact_eval(ref::SechTanh{1.0, 0.0}, x, 0.0), std::invalid_argument);
  EXPECT_EQ(reference_kind(ref::Sinusoid{}), "sinusoid");
  const auto f = exact_field(ref::LinearNegativeSlope{}, RegisterLayout::line("x", 2, 0.5), 0.0);
  EXPECT_EQ(f, (std::vector<double>{0.0, -0.5, -1.0, -1.5}));
}

TEST(L2Error, Metrics) {
  const auto m = l2_error({{3.0, 4.0}, {1.0, 1.0}, {0.0, 0.0}}, {{0.0, 0.0}, {1.0, 1.0}, {3.0, 4.0}});
  ASSERT_EQ(m.rel_l2.size(), 3u);
  EXPECT_DOUBLE_EQ(m.rel_l2[0], 5.0 / 1e-12);
  EXPECT_TRUE(m.guarded[0]);
  EXPECT_EQ(m.rel_l2[1], 0.0);
  EXPECT_EQ(m.linf[1], 0.0);
  EXPECT_FALSE(m.guarded[1]);
  EXPECT_DOUBLE_EQ(m.rel_l2[2], 1.0);
  EXPECT_DOUBLE_EQ(m.linf[2], 4.0);
  EXPECT_THROW(l2_error({{1.0}}, {{1.0}, {2.0}}), std::invalid_argument);
  EXPECT_THROW(l2_error({{1.0, 2.0}}, {{1.0}}), std::invalid_argument);
}

}  // namespace
}  // namespace vqpde
