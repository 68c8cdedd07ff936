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

#include "vqpde/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace vqpde {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense periodic stencils built from grid coordinates, independently of the
// shift-operator code.
class Stencils {
 public:
  explicit Stencils(const RegisterLayout& layout) : layout_(layout), n_(layout.dim()) {
    std::size_t stride = 1;
    for (const auto& a : layout.axes()) {
      strides_.push_back(stride);
      sizes_.push_back(std::size_t{1} << a.qubits);
      stride *= sizes_.back();
    }
  }

  std::size_t dim() const { return n_; }
  MatrixXd I() const { return MatrixXd::Identity(n(), n()); }

  // (S f)_j = f_{j - e_axis}: the matrix of the forward shift j -> j + 1.
  MatrixXd S(const std::string& axis) const {
    const std::size_t a = layout_.axis_index(axis);
    MatrixXd m = MatrixXd::Zero(n(), n());
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t c = (j / strides_[a]) % sizes_[a];
      const std::size_t up = j - c * strides_[a] + ((c + 1) % sizes_[a]) * strides_[a];
      m(static_cast<Eigen::Index>(up), static_cast<Eigen::Index>(j)) = 1.0;
    }
    return m;
  }
  MatrixXd grad(const std::string& axis) const {
    return (S(axis) - I()) / layout_.axis(axis).spacing;
  }
  MatrixXd lap(const std::string& axis) const {
    const double d = layout_.axis(axis).spacing;
    const MatrixXd s = S(axis);
    return (s.transpose() - 2.0 * I() + s) / (d * d);
  }
  static MatrixXd diag(const VectorXd& f) { return f.asDiagonal(); }

 private:
  Eigen::Index n() const { return static_cast<Eigen::Index>(n_); }
  const RegisterLayout& layout_;
  std::size_t n_;
  std::vector<std::size_t> strides_, sizes_;
};

VectorXd vec(const std::vector<double>& f) {
  return Eigen::Map<const VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

std::vector<double> stdvec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

const std::vector<double>& field(const FieldSet& fs, const std::string& name, std::size_t n) {
  auto it = fs.find(name);
  if (it == fs.end()) throw std::invalid_argument("missing field '" + name + "'");
  if (it->second.size() != n) throw std::invalid_argument("field '" + name + "' has wrong size");
  return it->second;
}

VectorXd solve_checked(const MatrixXd& M, const VectorXd& rhs, const std::string& what) {
  Eigen::PartialPivLU<MatrixXd> lu(M);
  const double rc = lu.rcond();
  if (!(rc > 1e-12)) {
    throw SingularSystem(what + ": implicit system is singular (condition estimate " +
                             std::to_string(rc > 0 ? 1.0 / rc : INFINITY) + ")",
                         rc > 0 ? 1.0 / rc : INFINITY);
  }
  return lu.solve(rhs);
}

// grad-type left-hand sides fix the solution only up to a constant along the
// derivative axis: least squares, then restore the mean of `keep_mean`.
VectorXd solve_gauge(const MatrixXd& M, const VectorXd& rhs, const VectorXd& keep_mean) {
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(M);
  VectorXd x = cod.solve(rhs);
  x.array() += keep_mean.mean() - x.mean();
  return x;
}

}  // namespace

std::string reference_kind(const ReferenceSolution& r) {
  static const char* names[] = {"ns_exponential", "couette_steady", "sech_tanh", "sinusoid",
                                "linear_negative_slope"};
  return names[r.index()];
}

double exact_eval(const ReferenceSolution& r, std::span<const double> x, double t) {
  auto coord = [&](std::size_t i) { return i < x.size() ? x[i] : 0.0; };
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ref::NsExponential>) {
          const double den = s.nu * (s.alpha * s.alpha + s.beta * s.beta);
          if (den == 0.0 || !std::isfinite(den)) {
            throw std::invalid_argument("NsExponential needs nu (alpha^2 + beta^2) != 0");
          }
          const double vx =
              s.A * std::exp(s.c * (s.alpha * coord(0) + s.beta * coord(1)) / den) + s.B;
          if (s.component == 0) return vx;
          if (s.beta == 0.0) throw std::invalid_argument("NsExponential v_y needs beta != 0");
          return (s.c - s.alpha * vx) / s.beta;
        } else if constexpr (std::is_same_v<T, ref::CouetteSteady>) {
          if (s.H == 0.0) throw std::invalid_argument("CouetteSteady needs H != 0");
          return s.U * coord(0) / s.H;
        } else if constexpr (std::is_same_v<T, ref::SechTanh>) {
          if (s.width == 0.0) throw std::invalid_argument("SechTanh needs width != 0");
          const double z = (coord(0) - s.center) / s.width;
          return s.amplitude * (s.use_tanh ? std::tanh(z) : 1.0 / std::cosh(z));
        } else if constexpr (std::is_same_v<T, ref::Sinusoid>) {
          return s.amplitude * std::exp(-s.decay * t) * std::sin(s.wavenumber * coord(0) + s.phase);
        } else {
          if (!(s.slope < 0.0)) throw std::invalid_argument("LinearNegativeSlope needs slope < 0");
          return s.slope * coord(0) + s.intercept;
        }
      },
      r);
}

std::vector<double> exact_field(const ReferenceSolution& r, const RegisterLayout& layout,
                                double t) {
  std::vector<double> f(layout.dim());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = exact_eval(r, layout.position(k), t);
  return f;
}

FieldSet classical_step(const PdeProblem& problem, const History& history,
                        const RegisterLayout& layout, double tau) {
  if (!(tau > 0)) throw std::invalid_argument("tau must be > 0");
  validate(problem, layout);
  if (history.levels.size() < history_depth(problem)) {
    throw std::invalid_argument("not enough history levels");
  }
  const Stencils st(layout);
  const std::size_t n = st.dim();
  const FieldSet& cur = history.levels[0];
  FieldSet next = cur;
  const std::string x = layout.axes().front().label;

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, pde::NavierStokes>) {
          static const char* comps[] = {"x", "y", "z"};
          for (std::size_t c = 0; c < p.dims; ++c) {
            const std::string name = std::string("vel_") + comps[c];
            const VectorXd v = vec(field(next, name, n));
            MatrixXd rhs = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            for (const auto& a : layout.axes()) {
              if (a.label != "x" && a.label != "y" && a.label != "z") continue;
              const std::string va = "vel_" + a.label;
              if (next.count(va) && (a.label == "x" ? 0 : a.label == "y" ? 1 : 2) < static_cast<int>(p.dims)) {
                rhs -= Stencils::diag(vec(field(next, va, n))) * st.grad(a.label);
              }
              rhs += p.nu * st.lap(a.label);
            }
            VectorXd out = v + tau * rhs * v;
            const double pc = tau / (p.rho * p.h);
            if (const auto* ug = std::get_if<pde::UniformGradient>(&p.pressure)) {
              if (c == 0) out.array() -= pc * ug->value;
            } else if (const auto* pf = std::get_if<pde::PressureField>(&p.pressure)) {
              if (layout.has_axis(comps[c])) out -= pc * st.grad(comps[c]) * vec(pf->samples);
            }
            next[name] = stdvec(out);
          }
        } else if constexpr (std::is_same_v<T, pde::Einstein>) {
          const std::string ai = p.axis_i.empty() ? x : p.axis_i;
          const std::string an = p.axis_n.empty() ? ai : p.axis_n;
          const double kappa = 8.0 * std::numbers::pi * p.G / std::pow(p.c, 4);
          const VectorXd g = vec(field(cur, "g", n));
          const VectorXd T = vec(stress_energy(p, layout, history.t, field(cur, "g", n)));
          const MatrixXd Si = st.S(ai);
          const VectorXd rhs =
              Si * g + kappa * layout.axis(ai).spacing * layout.axis(an).spacing * T;
          next["g"] = stdvec(solve_checked(Si, rhs, "einstein"));
        } else if constexpr (std::is_same_v<T, pde::Maxwell>) {
          const bool bup = p.which == pde::MaxwellUpdate::B;
          const std::string target = (bup ? "B_" : "E_") + p.component;
          const std::string src = bup ? "E_" : "B_";
          // curl components written out directly
          std::string fa, fb, aa, ab;
          if (p.component == "x") { aa = "y"; fa = "z"; ab = "z"; fb = "y"; }
          if (p.component == "y") { aa = "z"; fa = "x"; ab = "x"; fb = "z"; }
          if (p.component == "z") { aa = "x"; fa = "y"; ab = "y"; fb = "x"; }
          VectorXd curl = VectorXd::Zero(static_cast<Eigen::Index>(n));
          if (layout.has_axis(aa)) curl += st.grad(aa) * vec(field(cur, src + fa, n));
          if (layout.has_axis(ab)) curl -= st.grad(ab) * vec(field(cur, src + fb, n));
          const VectorXd f = vec(field(cur, target, n));
          next[target] = stdvec(bup ? VectorXd(f - tau * curl)
                                    : VectorXd(f + tau / (p.mu0 * p.eps0) * curl));
        } else if constexpr (std::is_same_v<T, pde::Boussinesq>) {
          const VectorXd u = vec(field(cur, "u", n));
          const VectorXd up = vec(field(history.levels[1], "u", n));
          const MatrixXd L = st.lap(x);
          const MatrixXd M = st.I() - p.beta * L;
          const VectorXd u2 = u.array().square().matrix();
          const VectorXd rhs = M * (2.0 * u - up) + tau * tau * (L * u + p.alpha * L * u2);
          next["u"] = stdvec(solve_checked(M, rhs, "boussinesq"));
        } else if constexpr (std::is_same_v<T, pde::LinTsien>) {
          const VectorXd u = vec(field(cur, "u", n));
          const MatrixXd G = st.grad(x);
          const VectorXd ux = G * u;
          VectorXd rhs = G * u - 0.5 * tau * Stencils::diag(ux) * st.lap(x) * u;
          if (layout.axes().size() > 1) rhs += 0.5 * tau * st.lap(layout.axes()[1].label) * u;
          next["u"] = stdvec(solve_gauge(G, rhs, u));
        } else if constexpr (std::is_same_v<T, pde::CamassaHolm>) {
          const VectorXd u = vec(field(cur, "u", n));
          const MatrixXd G = st.grad(x);
          const MatrixXd L = st.lap(x);
          const VectorXd ux = G * u;
          const VectorXd uxx = L * u;
          const VectorXd uxxx = G * uxx;
          const MatrixXd M = st.I() - L;
          const VectorXd rhs =
              M * u + tau * (2.0 * ux.cwiseProduct(uxx) + u.cwiseProduct(uxxx) -
                             3.0 * u.cwiseProduct(ux) - 2.0 * p.kappa * ux);
          next["u"] = stdvec(solve_checked(M, rhs, "camassa_holm"));
        } else if constexpr (std::is_same_v<T, pde::DSW>) {
          const VectorXd u = vec(field(cur, "u", n));
          const VectorXd v = vec(field(cur, "v", n));
          const MatrixXd G = st.grad(x);
          const MatrixXd L = st.lap(x);
          next["u"] = stdvec(u - 3.0 * tau * v.cwiseProduct(G * v));
          const MatrixXd M = st.I() - 2.0 * tau * G * L;
          const VectorXd rhs = v + 2.0 * tau * u.cwiseProduct(G * v) + tau * G * u;
          next["v"] = stdvec(solve_checked(M, rhs, "dsw"));
        } else {
          const VectorXd u = vec(field(cur, "u", n));
          const MatrixXd G = st.grad(x);
          const VectorXd ux = G * u;
          const VectorXd rhs = G * u - tau * G * u.cwiseProduct(ux) + 0.5 * tau * ux.cwiseProduct(ux);
          next["u"] = stdvec(solve_gauge(G, rhs, u));
        }
      },
      problem);
  return next;
}

History initial_history(const PdeProblem& problem, const FieldSet& initial,
                        const RegisterLayout& layout, double tau) {
  History h;
  h.t = 0.0;
  h.levels.push_back(initial);
  if (const auto* b = std::get_if<pde::Boussinesq>(&problem)) {
    const Stencils st(layout);
    const std::string x = layout.axes().front().label;
    const VectorXd u = vec(field(initial, "u", st.dim()));
    const MatrixXd L = st.lap(x);
    const MatrixXd M = st.I() - b->beta * L;
    const VectorXd u2 = u.array().square().matrix();
    const VectorXd utt = solve_checked(M, L * u + b->alpha * L * u2, "boussinesq bootstrap");
    FieldSet prev = initial;
    prev["u"] = stdvec(u + 0.5 * tau * tau * utt);
    h.levels.push_back(std::move(prev));
  }
  return h;
}

ClassicalTrajectory run_classical(const PdeProblem& problem, const FieldSet& initial,
                                  const RegisterLayout& layout, double tau,
                                  std::size_t n_steps) {
  ClassicalTrajectory out;
  History h = initial_history(problem, initial, layout, tau);
  out.times.push_back(0.0);
  out.fields.push_back(initial);
  for (std::size_t k = 0; k < n_steps; ++k) {
    FieldSet next = classical_step(problem, h, layout, tau);
    h.levels.insert(h.levels.begin(), next);
    h.levels.resize(std::max<std::size_t>(1, history_depth(problem)));
    h.t = static_cast<double>(k + 1) * tau;
    out.times.push_back(h.t);
    out.fields.push_back(std::move(next));
  }
  return out;
}

ErrorMetrics l2_error(const std::vector<std::vector<double>>& approx,
                      const std::vector<std::vector<double>>& reference) {
  if (approx.size() != reference.size()) {
    throw std::invalid_argument("trajectories have different lengths (" +
                                std::to_string(approx.size()) + " vs " +
                                std::to_string(reference.size()) + ")");
  }
  ErrorMetrics m;
  for (std::size_t s = 0; s < approx.size(); ++s) {
    if (approx[s].size() != reference[s].size()) {
      throw std::invalid_argument("grid mismatch at step " + std::to_string(s));
    }
    double d2 = 0.0, r2 = 0.0, dmax = 0.0;
    for (std::size_t i = 0; i < approx[s].size(); ++i) {
      const double d = approx[s][i] - reference[s][i];
      d2 += d * d;
      r2 += reference[s][i] * reference[s][i];
      dmax = std::max(dmax, std::abs(d));
    }
    const double rn = std::sqrt(r2);
    m.rel_l2.push_back(std::sqrt(d2) / std::max(rn, 1e-12));
    m.linf.push_back(dmax);
    m.guarded.push_back(rn < 1e-12);
  }
  return m;
}

double ns_exponential_residual(const ref::NsExponential& r, std::size_t n, double length,
                               bool swap_grouping) {
  if (n < 3) throw std::invalid_argument("need at least 3 points per axis");
  const double d = length / static_cast<double>(n);
  const double s2 = r.alpha * r.alpha + r.beta * r.beta;
  const double k = swap_grouping ? r.c * s2 / r.nu : r.c / (r.nu * s2);
  auto vx = [&](std::size_t i, std::size_t j) {
    const double x = static_cast<double>(i) * d, y = static_cast<double>(j) * d;
    return r.A * std::exp(k * (r.alpha * x + r.beta * y)) + r.B;
  };
  auto vy = [&](std::size_t i, std::size_t j) { return (r.c - r.alpha * vx(i, j)) / r.beta; };
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const double u = vx(i, j);
      const double dx = (vx(i + 1, j) - u) / d;
      const double dy = (vx(i, j + 1) - u) / d;
      const double lap = (vx(i + 1, j) - 2.0 * u + vx(i - 1, j)) / (d * d) +
                         (vx(i, j + 1) - 2.0 * u + vx(i, j - 1)) / (d * d);
      const double res = -(u * dx + vy(i, j) * dy) + r.nu * lap;
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

}  // namespace vqpde
