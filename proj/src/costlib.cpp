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

#include "vqpde/costlib.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace vqpde {

namespace {

constexpr const char* kCandPrefix = "cand:";

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_state(const QuantumState& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& a : s.amplitudes()) {
    double parts[2] = {a.real(), a.imag()};
    unsigned char bytes[sizeof parts];
    std::memcpy(bytes, parts, sizeof parts);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::string atoms_key(const OpTerm& t) {
  std::string s;
  for (const auto& a : t.atoms) s += to_string(a) + " ";
  return s;
}

QuantumState add_scaled(const QuantumState& acc, const QuantumState& x, Complex c) {
  std::vector<Complex> out(acc.amplitudes().begin(), acc.amplitudes().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * x[i];
  return QuantumState(acc.n_qubits(), std::move(out));
}

double norm_sq(const QuantumState& s) {
  double r = 0.0;
  for (const auto& a : s.amplitudes()) r += std::norm(a);
  return r;
}

const std::vector<double>& need_field(const FieldSet& level, const std::string& name,
                                      const RegisterLayout& layout) {
  auto it = level.find(name);
  if (it == level.end()) {
    throw std::invalid_argument("history is missing field '" + name + "'");
  }
  if (it->second.size() != layout.dim()) {
    throw std::invalid_argument("field '" + name + "' has " +
                                std::to_string(it->second.size()) + " samples, grid has " +
                                std::to_string(layout.dim()));
  }
  for (double v : it->second) {
    if (!std::isfinite(v)) throw std::invalid_argument("field '" + name + "' is not finite");
  }
  return it->second;
}

// First layout axis: the spatial direction of the one-dimensional equations.
const Axis& line_axis(const RegisterLayout& layout) {
  if (layout.axes().empty()) throw std::invalid_argument("layout has no axes");
  return layout.axes().front();
}

const std::vector<std::string> kComponents = {"x", "y", "z"};

}  // namespace

std::string candidate_tag(const std::string& field) { return kCandPrefix + field; }

std::string pde_name(const PdeProblem& p) {
  static const char* names[] = {"navier_stokes", "einstein",     "maxwell", "boussinesq",
                                "lin_tsien",     "camassa_holm", "dsw",     "hunter_saxton"};
  return names[p.index()];
}

std::vector<std::string> state_fields(const PdeProblem& p) {
  return std::visit(
      [](const auto& x) -> std::vector<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, pde::NavierStokes>) {
          std::vector<std::string> f;
          for (std::size_t i = 0; i < x.dims && i < 3; ++i) f.push_back("vel_" + kComponents[i]);
          return f;
        } else if constexpr (std::is_same_v<T, pde::Einstein>) {
          return {"g"};
        } else if constexpr (std::is_same_v<T, pde::Maxwell>) {
          return {"B_x", "B_y", "B_z", "E_x", "E_y", "E_z"};
        } else if constexpr (std::is_same_v<T, pde::DSW>) {
          return {"u", "v"};
        } else {
          return {"u"};
        }
      },
      p);
}

std::vector<std::vector<std::string>> update_groups(const PdeProblem& p) {
  if (const auto* ns = std::get_if<pde::NavierStokes>(&p)) {
    std::vector<std::vector<std::string>> g;
    for (std::size_t i = 0; i < ns->dims && i < 3; ++i) g.push_back({"vel_" + kComponents[i]});
    return g;
  }
  if (const auto* mx = std::get_if<pde::Maxwell>(&p)) {
    return {{std::string(mx->which == pde::MaxwellUpdate::B ? "B_" : "E_") + mx->component}};
  }
  return {state_fields(p)};
}

std::size_t history_depth(const PdeProblem& p) {
  return std::holds_alternative<pde::Boussinesq>(p) ? 2 : 1;
}

void validate(const PdeProblem& p, const RegisterLayout& layout) {
  auto finite = [](double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
  };
  if (layout.axes().empty()) throw std::invalid_argument("grid has no axes");
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, pde::NavierStokes>) {
          finite(x.nu, "problem.nu");
          finite(x.rho, "problem.rho");
          if (!(x.nu >= 0)) throw std::invalid_argument("problem.nu must be >= 0");
          if (!(x.rho > 0)) throw std::invalid_argument("problem.rho must be > 0");
          if (!(x.h > 0)) throw std::invalid_argument("problem.h must be > 0");
          if (x.dims < 1 || x.dims > 3) throw std::invalid_argument("problem.dims must be 1, 2 or 3");
          if (const auto* pf = std::get_if<pde::PressureField>(&x.pressure)) {
            if (pf->samples.size() != layout.dim()) {
              throw std::invalid_argument("problem.pressure.samples does not match the grid");
            }
          }
          if (const auto* ug = std::get_if<pde::UniformGradient>(&x.pressure)) {
            finite(ug->value, "problem.pressure.value");
          }
          bool any = false;
          for (const auto& a : layout.axes()) {
            any |= a.label == "x" || a.label == "y" || a.label == "z";
          }
          if (!any) throw std::invalid_argument("Navier-Stokes needs a grid axis named x, y or z");
        } else if constexpr (std::is_same_v<T, pde::Einstein>) {
          finite(x.G, "problem.G");
          if (!(x.c > 0)) throw std::invalid_argument("problem.c must be > 0");
          if (x.j < 0 || x.j > 3 || x.m < 0 || x.m > 3) {
            throw std::invalid_argument("problem indices must be in 0..3");
          }
          if (!x.axis_i.empty()) layout.axis_index(x.axis_i);
          if (!x.axis_n.empty()) layout.axis_index(x.axis_n);
          if (const auto* pp = std::get_if<pde::PointParticle>(&x.tensor)) {
            if (!(std::abs(pp->speed) < x.c)) {
              throw std::invalid_argument("point particle speed must be below c");
            }
          }
          if (const auto* em = std::get_if<pde::Electromagnetic>(&x.tensor)) {
            if (!(em->mu0 > 0)) throw std::invalid_argument("problem.tensor.mu0 must be > 0");
          }
        } else if constexpr (std::is_same_v<T, pde::Maxwell>) {
          if (x.component != "x" && x.component != "y" && x.component != "z") {
            throw std::invalid_argument("problem.component must be x, y or z");
          }
          if (!(x.mu0 > 0) || !(x.eps0 > 0)) {
            throw std::invalid_argument("problem.mu0 and problem.eps0 must be > 0");
          }
        } else if constexpr (std::is_same_v<T, pde::Boussinesq>) {
          finite(x.alpha, "problem.alpha");
          finite(x.beta, "problem.beta");
        } else if constexpr (std::is_same_v<T, pde::CamassaHolm>) {
          finite(x.kappa, "problem.kappa");
        }
      },
      p);
}

FrozenState encode_frozen(std::span<const double> samples, std::size_t n_qubits) {
  if (samples.size() != (std::size_t{1} << n_qubits)) {
    throw std::invalid_argument("frozen field does not match the register");
  }
  if (std::all_of(samples.begin(), samples.end(), [](double v) { return v == 0.0; })) {
    return {QuantumState(n_qubits), 0.0};
  }
  const EncodedField e = amplitude_encode(samples);
  return {e.state, e.lambda0};
}

// --- CostFunction -----------------------------------------------------------

CostFunction::CostFunction(RegisterLayout layout, CostSpec spec)
    : layout_(std::move(layout)), spec_(std::move(spec)) {
  const std::size_t nc = spec_.candidates.size();
  if (nc == 0) throw std::invalid_argument("cost has no candidate fields");
  for (const auto& [tag, samples] : spec_.frozen) {
    if (tag.rfind(kCandPrefix, 0) == 0) {
      throw std::invalid_argument("frozen tag may not start with 'cand:'");
    }
    frozen_.emplace(tag, encode_frozen(samples, layout_.total_qubits()));
  }
  quad_.assign(nc, OpExpr());
  lin_.assign(nc, QuantumState(layout_.total_qubits(),
                               std::vector<Complex>(layout_.dim())));
  cross_.assign(nc, {});

  struct Key {
    int section;
    std::string bra, ket, atoms;
    bool operator<(const Key& o) const {
      return std::tie(section, bra, ket, atoms) < std::tie(o.section, o.bra, o.ket, o.atoms);
    }
  };
  std::map<Key, CostTerm> collected;
  auto collect = [&](int section, const std::string& bra, const std::string& ket,
                     const OpExpr& e) {
    for (const auto& t : e.terms()) {
      Key k{section, bra, ket, atoms_key(t)};
      auto it = collected.find(k);
      if (it == collected.end()) {
        collected.emplace(k, CostTerm{t.coeff, bra, OpTerm{1.0, t.atoms}, ket});
      } else {
        it->second.coeff += t.coeff;
      }
    }
  };

  const std::size_t nq = layout_.total_qubits();
  for (const auto& slot : spec_.slots) {
    auto cit = std::find(spec_.candidates.begin(), spec_.candidates.end(), slot.candidate);
    if (cit == spec_.candidates.end()) {
      throw std::invalid_argument("slot candidate '" + slot.candidate + "' is not a candidate");
    }
    const std::size_t ci = static_cast<std::size_t>(cit - spec_.candidates.begin());
    const std::string ctag = candidate_tag(slot.candidate);
    const OpExpr Md = adjoint(slot.M);
    const OpExpr P = Md * slot.M * slot.weight;
    quad_[ci] = quad_[ci] + P;
    collect(0, ctag, ctag, P);

    QuantumState image(nq, std::vector<Complex>(layout_.dim()));
    for (const auto& [tag, E] : slot.sources) {
      auto fit = frozen_.find(tag);
      if (fit == frozen_.end()) throw std::invalid_argument("unknown frozen tag '" + tag + "'");
      const OpExpr X = Md * E * (-2.0 * slot.weight);
      cross_[ci].emplace_back(tag, X);
      collect(1, ctag, tag, X);
      if (fit->second.scale != 0.0) {
        image = add_scaled(image, apply_expr(E, fit->second.state, layout_, spec_.bindings),
                           fit->second.scale);
      }
    }
    lin_[ci] = add_scaled(lin_[ci], apply_expr(Md, image, layout_, spec_.bindings),
                          slot.weight);
    offset_ += slot.weight * norm_sq(image);

    for (const auto& [tk, Ek] : slot.sources) {
      const OpExpr Ekd = adjoint(Ek);
      for (const auto& [tl, El] : slot.sources) collect(2, tk, tl, Ekd * El * slot.weight);
    }
  }
  for (auto& [k, t] : collected) {
    if (t.coeff != Complex{}) terms_.push_back(std::move(t));
  }
}

const QuantumState& CostFunction::state_for(const std::string& tag,
                                            std::span<const QuantumState> states,
                                            std::span<const double> lambda0s,
                                            double& scale) const {
  if (tag.rfind(kCandPrefix, 0) == 0) {
    const std::string f = tag.substr(std::strlen(kCandPrefix));
    auto it = std::find(spec_.candidates.begin(), spec_.candidates.end(), f);
    const std::size_t i = static_cast<std::size_t>(it - spec_.candidates.begin());
    scale = lambda0s[i];
    return states[i];
  }
  const FrozenState& fs = frozen_.at(tag);
  scale = fs.scale;
  return fs.state;
}

namespace {
void check_candidates(std::size_t expected, std::span<const QuantumState> states,
                      std::span<const double> lambda0s, const RegisterLayout& layout) {
  if (states.size() != expected || lambda0s.size() != expected) {
    throw std::invalid_argument("expected " + std::to_string(expected) + " candidate states");
  }
  for (const auto& s : states) {
    if (s.n_qubits() != layout.total_qubits()) {
      throw std::invalid_argument("candidate state does not match the grid");
    }
  }
}
}  // namespace

double CostFunction::evaluate_states(std::span<const QuantumState> states,
                                     std::span<const double> lambda0s) const {
  check_candidates(spec_.candidates.size(), states, lambda0s, layout_);
  double c = offset_;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double l0 = lambda0s[i];
    c += l0 * l0 * quadratic_block(i, states[i]) + l0 * linear_block(i, states[i]);
  }
  return c;
}

double CostFunction::residual_norm_sq(std::span<const QuantumState> states,
                                      std::span<const double> lambda0s) const {
  check_candidates(spec_.candidates.size(), states, lambda0s, layout_);
  double total = 0.0;
  for (const auto& slot : spec_.slots) {
    double l0 = 0.0;
    const QuantumState& c = state_for(candidate_tag(slot.candidate), states, lambda0s, l0);
    QuantumState r = apply_expr(slot.M, c, layout_, spec_.bindings).scaled(l0);
    for (const auto& [tag, E] : slot.sources) {
      const FrozenState& fs = frozen_.at(tag);
      r = add_scaled(r, apply_expr(E, fs.state, layout_, spec_.bindings), -fs.scale);
    }
    total += slot.weight * norm_sq(r);
  }
  return total;
}

double CostFunction::term_sum(std::span<const QuantumState> states,
                              std::span<const double> lambda0s) const {
  check_candidates(spec_.candidates.size(), states, lambda0s, layout_);
  double total = 0.0;
  for (const auto& t : terms_) {
    double sb = 0.0, sk = 0.0;
    const QuantumState& b = state_for(t.bra, states, lambda0s, sb);
    const QuantumState& k = state_for(t.ket, states, lambda0s, sk);
    if (sb == 0.0 || sk == 0.0) continue;
    const Complex z = inner(b, apply_term(t.op, k, layout_, spec_.bindings));
    total += (t.coeff * sb * sk * z).real();
  }
  return total;
}

double CostFunction::quadratic_block(std::size_t i, const QuantumState& psi,
                                     std::optional<ShotMode> mode) const {
  if (!mode) return inner(psi, apply_expr(quad_.at(i), psi, layout_, spec_.bindings)).real();
  const std::uint64_t base = mix(mode->seed ^ hash_state(psi) ^ (0xA5A5ULL + 2 * i));
  double total = 0.0;
  std::uint64_t j = 0;
  for (const auto& t : quad_.at(i).terms()) {
    const Estimate e =
        t.is_unitary()
            ? hadamard_test(psi, psi, t, layout_, Part::Real, ShotMode{mode->shots, mix(base + j)})
            : hadamard_test(psi, psi, t, layout_, Part::Real, std::nullopt, spec_.bindings);
    total += e.value;
    ++j;
  }
  return total;
}

double CostFunction::linear_block(std::size_t i, const QuantumState& psi,
                                  std::optional<ShotMode> mode) const {
  if (!mode) return -2.0 * inner(psi, lin_.at(i)).real();
  const std::uint64_t base = mix(mode->seed ^ hash_state(psi) ^ (0xA5A5ULL + 2 * i + 1));
  double total = 0.0;
  std::uint64_t j = 0;
  for (const auto& [tag, X] : cross_.at(i)) {
    const FrozenState& fs = frozen_.at(tag);
    for (const auto& t : X.terms()) {
      ++j;
      if (fs.scale == 0.0) continue;
      const Estimate e =
          t.is_unitary()
              ? hadamard_test(psi, fs.state, t, layout_, Part::Real,
                              ShotMode{mode->shots, mix(base + j)})
              : hadamard_test(psi, fs.state, t, layout_, Part::Real, std::nullopt,
                              spec_.bindings);
      total += fs.scale * e.value;
    }
  }
  return total;
}

// --- builders ---------------------------------------------------------------

OpExpr build_q_operator(const pde::NavierStokes& problem, const FieldSet& frozen,
                        const RegisterLayout& layout, double tau) {
  if (!(tau > 0)) throw std::invalid_argument("tau must be > 0");
  OpExpr rhs;
  for (const auto& a : layout.axes()) {
    if (a.label != "x" && a.label != "y" && a.label != "z") continue;
    const std::string vel = "vel_" + a.label;
    if (frozen.count(vel)) rhs = rhs - OpExpr::diag(vel) * grad_op(a.label, a.spacing);
    rhs = rhs + laplacian_op(a.label, a.spacing) * problem.nu;
  }
  return (OpExpr::identity() + rhs * tau) * (problem.h / tau);
}

namespace {

struct Builder {
  const RegisterLayout& layout;
  const History& history;
  double tau;
  CostSpec spec;

  const std::vector<double>& current(const std::string& f) {
    return need_field(history.levels.at(0), f, layout);
  }
  void bind(const std::string& f) { spec.bindings[f] = current(f); }
  void freeze(const std::string& tag, std::vector<double> samples) {
    spec.frozen[tag] = std::move(samples);
  }
  void freeze_current(const std::string& f) { freeze(f, current(f)); }
  void freeze_previous(const std::string& f) {
    freeze(f + "@1", need_field(history.levels.at(1), f, layout));
  }
  void bind_gradient(const std::string& f, const std::string& name) {
    const Axis& ax = line_axis(layout);
    spec.bindings[name] = apply_expr_real(grad_op(ax.label, ax.spacing), current(f), layout, {});
  }
};

void build_navier_stokes(Builder& b, const pde::NavierStokes& p, std::size_t group) {
  const std::string comp = kComponents.at(group);
  const std::string field = "vel_" + comp;
  FieldSet advect;
  for (std::size_t i = 0; i < p.dims; ++i) {
    const std::string f = "vel_" + kComponents[i];
    b.bind(f);
    advect[f] = b.current(f);
  }
  b.freeze_current(field);
  Slot s{field, 1.0, OpExpr::identity(), {}};
  s.sources.emplace_back(field,
                         build_q_operator(p, advect, b.layout, b.tau) * (b.tau / p.h));
  const double pc = -b.tau / (p.rho * p.h);
  if (const auto* ug = std::get_if<pde::UniformGradient>(&p.pressure)) {
    if (comp == "x" && ug->value != 0.0) {
      b.freeze("grad_p", std::vector<double>(b.layout.dim(), ug->value));
      s.sources.emplace_back("grad_p", OpExpr::identity(pc));
    }
  } else if (const auto* pf = std::get_if<pde::PressureField>(&p.pressure)) {
    if (b.layout.has_axis(comp)) {
      b.freeze("p", pf->samples);
      s.sources.emplace_back("p", grad_op(comp, b.layout.axis(comp).spacing) * pc);
    }
  }
  b.spec.candidates = {field};
  b.spec.slots = {std::move(s)};
}

void build_einstein(Builder& b, const pde::Einstein& p) {
  const std::string ai = p.axis_i.empty() ? line_axis(b.layout).label : p.axis_i;
  const std::string an = p.axis_n.empty() ? ai : p.axis_n;
  const double di = b.layout.axis(ai).spacing;
  const double dn = b.layout.axis(an).spacing;
  const double kappa = 8.0 * std::numbers::pi * p.G / std::pow(p.c, 4);
  b.freeze_current("g");
  b.freeze("T", stress_energy(p, b.layout, b.history.t, b.current("g")));
  Slot s{"g", 1.0, OpExpr::shift(ai), {}};
  s.sources.emplace_back("g", OpExpr::shift(ai));
  s.sources.emplace_back("T", OpExpr::identity(kappa * di * dn));
  b.spec.candidates = {"g"};
  b.spec.slots = {std::move(s)};
}

void build_maxwell(Builder& b, const pde::Maxwell& p) {
  // index table: component i -> (y index, z index, first axis, second axis)
  struct Row {
    const char* fy;
    const char* fz;
    const char* a;
    const char* b;
    double sgn;
  };
  static const std::map<std::string, Row> table = {
      {"x", {"z", "y", "y", "z", +1.0}},
      {"y", {"z", "x", "x", "z", -1.0}},
      {"z", {"y", "x", "x", "y", +1.0}},
  };
  const Row& row = table.at(p.component);
  const bool bupdate = p.which == pde::MaxwellUpdate::B;
  const std::string target = (bupdate ? "B_" : "E_") + p.component;
  const std::string other = bupdate ? "E_" : "B_";
  const double coef = bupdate ? -b.tau : b.tau / (p.mu0 * p.eps0);
  b.freeze_current(target);
  Slot s{target, 1.0, OpExpr::identity(), {}};
  s.sources.emplace_back(target, OpExpr::identity());
  // curl_c(F) = Sgn (grad_a F_y - grad_b F_z)
  if (b.layout.has_axis(row.a)) {
    const std::string f = other + row.fy;
    b.freeze_current(f);
    s.sources.emplace_back(f, grad_op(row.a, b.layout.axis(row.a).spacing) * (coef * row.sgn));
  }
  if (b.layout.has_axis(row.b)) {
    const std::string f = other + row.fz;
    b.freeze_current(f);
    s.sources.emplace_back(f, grad_op(row.b, b.layout.axis(row.b).spacing) * (-coef * row.sgn));
  }
  b.spec.candidates = {target};
  b.spec.slots = {std::move(s)};
}

void build_boussinesq(Builder& b, const pde::Boussinesq& p) {
  if (b.history.levels.size() < 2) {
    throw std::invalid_argument("Boussinesq needs two history levels");
  }
  const Axis& ax = line_axis(b.layout);
  const OpExpr one = OpExpr::identity();
  const OpExpr L = laplacian_op(ax.label, ax.spacing);
  const OpExpr M = one - L * p.beta;
  const double t2 = b.tau * b.tau;
  b.bind("u");
  b.freeze_current("u");
  b.freeze_previous("u");
  Slot s{"u", 1.0, M, {}};
  s.sources.emplace_back("u", M * 2.0 + L * t2 + L * OpExpr::diag("u") * (t2 * p.alpha));
  s.sources.emplace_back("u@1", -M);
  b.spec.candidates = {"u"};
  b.spec.slots = {std::move(s)};
}

void build_lin_tsien(Builder& b) {
  const Axis& ax = line_axis(b.layout);
  const OpExpr G = grad_op(ax.label, ax.spacing);
  OpExpr src = G - OpExpr::diag("u_x") * laplacian_op(ax.label, ax.spacing) * (b.tau / 2.0);
  if (b.layout.axes().size() > 1) {
    const Axis& ay = b.layout.axes()[1];
    src = src + laplacian_op(ay.label, ay.spacing) * (b.tau / 2.0);
  }
  b.bind_gradient("u", "u_x");
  b.freeze_current("u");
  Slot s{"u", 1.0, G, {}};
  s.sources.emplace_back("u", src);
  b.spec.candidates = {"u"};
  b.spec.slots = {std::move(s)};
}

void build_camassa_holm(Builder& b, const pde::CamassaHolm& p) {
  const Axis& ax = line_axis(b.layout);
  const OpExpr one = OpExpr::identity();
  const OpExpr G = grad_op(ax.label, ax.spacing);
  const OpExpr L = laplacian_op(ax.label, ax.spacing);
  const OpExpr Du = OpExpr::diag("u");
  const OpExpr M = one - L;
  const OpExpr rhs = OpExpr::diag("u_x") * L * 2.0 + Du * G * L - Du * G * 3.0 - G * (2.0 * p.kappa);
  b.bind("u");
  b.bind_gradient("u", "u_x");
  b.freeze_current("u");
  Slot s{"u", 1.0, M, {}};
  s.sources.emplace_back("u", M + rhs * b.tau);
  b.spec.candidates = {"u"};
  b.spec.slots = {std::move(s)};
}

void build_dsw(Builder& b) {
  const Axis& ax = line_axis(b.layout);
  const OpExpr one = OpExpr::identity();
  const OpExpr G = grad_op(ax.label, ax.spacing);
  const OpExpr L = laplacian_op(ax.label, ax.spacing);
  b.bind("u");
  b.bind("v");
  b.freeze_current("u");
  b.freeze_current("v");
  Slot su{"u", 1.0, one, {}};
  su.sources.emplace_back("u", one);
  su.sources.emplace_back("v", OpExpr::diag("v") * G * (-3.0 * b.tau));
  Slot sv{"v", 1.0, one - G * L * (2.0 * b.tau), {}};
  sv.sources.emplace_back("v", one + OpExpr::diag("u") * G * (2.0 * b.tau));
  sv.sources.emplace_back("u", G * b.tau);
  b.spec.candidates = {"u", "v"};
  b.spec.slots = {std::move(su), std::move(sv)};
}

void build_hunter_saxton(Builder& b) {
  const Axis& ax = line_axis(b.layout);
  const OpExpr G = grad_op(ax.label, ax.spacing);
  b.bind("u");
  b.bind_gradient("u", "u_x");
  b.freeze_current("u");
  Slot s{"u", 1.0, G, {}};
  s.sources.emplace_back("u", G - G * OpExpr::diag("u") * G * b.tau +
                                  OpExpr::diag("u_x") * G * (b.tau / 2.0));
  b.spec.candidates = {"u"};
  b.spec.slots = {std::move(s)};
}

}  // namespace

std::vector<double> stress_energy(const pde::Einstein& problem, const RegisterLayout& layout,
                                  double t, std::span<const double> g) {
  if (g.size() != layout.dim()) throw std::invalid_argument("metric field does not match grid");
  const std::string ai = problem.axis_i.empty() ? line_axis(layout).label : problem.axis_i;
  const std::size_t axis = layout.axis_index(ai);
  std::vector<double> T(layout.dim());
  for (std::size_t k = 0; k < T.size(); ++k) {
    T[k] = std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, pde::PointParticle>) {
            const double beta = m.speed / problem.c;
            const double gamma = 1.0 / std::sqrt(1.0 - beta * beta);
            const double x = layout.position(k)[axis];
            return m.mass * m.v_mu * m.v_nu * gamma * std::abs(x - (m.x0 + m.speed * t));
          } else if constexpr (std::is_same_v<M, pde::EquilibriumFluid>) {
            if (g[k] == 0.0) {
              throw std::invalid_argument("fluid stress-energy needs a nonzero metric component");
            }
            return (m.rho_e + m.pressure / (problem.c * problem.c)) * m.u_mu * m.u_nu +
                   m.pressure / g[k];
          } else {
            return (m.f_mu_alpha * m.f_nu_beta - 0.25 * m.invariant) * g[k] / m.mu0;
          }
        },
        problem.tensor);
  }
  return T;
}

CostSpec build_cost_spec(const PdeProblem& problem, const History& history,
                         const RegisterLayout& layout, double tau, std::size_t group) {
  if (!(tau > 0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
  validate(problem, layout);
  if (history.levels.size() < history_depth(problem)) {
    throw std::invalid_argument(pde_name(problem) + " needs " +
                                std::to_string(history_depth(problem)) + " history levels");
  }
  if (group >= update_groups(problem).size()) {
    throw std::invalid_argument("update group out of range");
  }
  Builder b{layout, history, tau, {}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, pde::NavierStokes>) {
          build_navier_stokes(b, p, group);
        } else if constexpr (std::is_same_v<T, pde::Einstein>) {
          build_einstein(b, p);
        } else if constexpr (std::is_same_v<T, pde::Maxwell>) {
          build_maxwell(b, p);
        } else if constexpr (std::is_same_v<T, pde::Boussinesq>) {
          build_boussinesq(b, p);
        } else if constexpr (std::is_same_v<T, pde::LinTsien>) {
          build_lin_tsien(b);
        } else if constexpr (std::is_same_v<T, pde::CamassaHolm>) {
          build_camassa_holm(b, p);
        } else if constexpr (std::is_same_v<T, pde::DSW>) {
          build_dsw(b);
        } else {
          build_hunter_saxton(b);
        }
      },
      problem);
  return std::move(b.spec);
}

CostFunction build_cost(const PdeProblem& problem, const History& history,
                        const RegisterLayout& layout, double tau, std::size_t group) {
  return CostFunction(layout, build_cost_spec(problem, history, layout, tau, group));
}

// --- parameters and evaluation ---------------------------------------------

std::vector<double> pack_parameters(std::span<const VariationalState> states) {
  std::vector<double> x;
  for (const auto& s : states) {
    x.insert(x.end(), s.lambda.begin(), s.lambda.end());
    x.push_back(s.lambda0);
  }
  return x;
}

std::vector<VariationalState> unpack_parameters(std::span<const AnsatzSpec> specs,
                                                std::span<const double> x) {
  std::size_t need = 0;
  for (const auto& s : specs) need += s.parameter_count() + 1;
  if (x.size() != need) {
    throw std::invalid_argument("expected " + std::to_string(need) + " parameters, got " +
                                std::to_string(x.size()));
  }
  std::vector<VariationalState> out;
  std::size_t k = 0;
  for (const auto& s : specs) {
    VariationalState v{s, {}, 0.0};
    v.lambda.assign(x.begin() + static_cast<std::ptrdiff_t>(k),
                    x.begin() + static_cast<std::ptrdiff_t>(k + s.parameter_count()));
    k += s.parameter_count();
    v.lambda0 = x[k++];
    out.push_back(std::move(v));
  }
  return out;
}

double evaluate_cost(const CostFunction& cost, std::span<const VariationalState> states,
                     std::optional<ShotMode> mode) {
  if (states.size() != cost.candidates().size()) {
    throw std::invalid_argument("expected one variational state per candidate field");
  }
  double c = cost.offset();
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].spec.n_qubits != cost.layout().total_qubits()) {
      throw std::invalid_argument("ansatz size does not match the grid");
    }
    const QuantumState psi = prepare(states[i].spec, states[i].lambda);
    const double l0 = states[i].lambda0;
    c += l0 * l0 * cost.quadratic_block(i, psi, mode) + l0 * cost.linear_block(i, psi, mode);
  }
  return c;
}

double evaluate_cost(const CostFunction& cost, std::span<const AnsatzSpec> specs,
                     std::span<const double> x, std::optional<ShotMode> mode) {
  const auto states = unpack_parameters(specs, x);
  return evaluate_cost(cost, std::span<const VariationalState>(states), mode);
}

std::vector<double> parameter_shift_grad(const CostFunction& cost,
                                         std::span<const AnsatzSpec> specs,
                                         std::span<const double> x,
                                         std::optional<ShotMode> mode) {
  const auto states = unpack_parameters(specs, x);
  if (states.size() != cost.candidates().size()) {
    throw std::invalid_argument("expected one ansatz per candidate field");
  }
  std::vector<double> g;
  g.reserve(x.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& vs = states[i];
    for (auto a : vs.spec.rotation_axes) {
      if (a != RotationAxis::Y && a != RotationAxis::Z) {
        throw std::invalid_argument("ansatz gate is not shift-rule compatible");
      }
    }
    const double l0 = vs.lambda0;
    auto q = [&](const QuantumState& psi) { return cost.quadratic_block(i, psi, mode); };
    auto l = [&](const QuantumState& psi) { return cost.linear_block(i, psi, mode); };
    const auto dq = shift_gradient_quadratic(vs.spec, vs.lambda, q);
    const auto dl = shift_gradient_linear(vs.spec, vs.lambda, l);
    for (std::size_t k = 0; k < dq.size(); ++k) g.push_back(l0 * l0 * dq[k] + l0 * dl[k]);
    const QuantumState psi = prepare(vs.spec, vs.lambda);
    g.push_back(2.0 * l0 * q(psi) + l(psi));
  }
  return g;
}

std::vector<CostTerm> cost_term_list(const CostFunction& cost) { return cost.terms(); }

std::string format_terms(const CostFunction& cost) {
  std::string out;
  char buf[64];
  for (const auto& t : cost.terms()) {
    std::snprintf(buf, sizeof buf, "(%.12g,%.12g)", t.coeff.real() + 0.0, t.coeff.imag() + 0.0);
    std::string atoms;
    for (const auto& a : t.op.atoms) atoms += (atoms.empty() ? "" : " ") + to_string(a);
    if (atoms.empty()) atoms = "1";
    out += std::string(buf) + " | " + t.bra + " | " + atoms + " | " + t.ket + "\n";
  }
  return out;
}

// --- default instances ------------------------------------------------------

std::vector<std::string> instance_names() {
  return {"navier_stokes", "couette",   "einstein", "maxwell",      "boussinesq",
          "lin_tsien",     "camassa_holm", "dsw",   "hunter_saxton"};
}

namespace {

std::vector<double> wave(const RegisterLayout& layout, double amp, double phase, double offset) {
  std::vector<double> f(layout.dim());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto c = layout.coordinates(k);
    double arg = phase;
    for (std::size_t a = 0; a < c.size(); ++a) {
      const double n = static_cast<double>(std::size_t{1} << layout.axes()[a].qubits);
      arg += 2.0 * std::numbers::pi * static_cast<double>(c[a]) / n * static_cast<double>(a + 1);
    }
    f[k] = offset + amp * std::sin(arg);
  }
  return f;
}

}  // namespace

PdeInstance default_instance(const std::string& name) {
  PdeInstance in;
  in.name = name;
  in.history.t = 0.0;
  if (name == "navier_stokes") {
    pde::NavierStokes p;
    p.nu = 0.1;
    p.dims = 2;
    p.pressure = pde::UniformGradient{0.5};
    in.problem = p;
    in.layout = RegisterLayout({{"x", 2, 0.25}, {"y", 1, 0.25}});
    in.history.levels = {{{"vel_x", wave(in.layout, 0.5, 0.3, 1.0)},
                          {"vel_y", wave(in.layout, 0.4, 1.1, -0.2)}}};
    in.tau = 0.01;
  } else if (name == "couette") {
    pde::NavierStokes p;
    p.nu = 1.0;
    in.problem = p;
    in.layout = RegisterLayout::line("y", 3, 1.0);
    in.history.levels = {{{"vel_x", wave(in.layout, 1.0, 0.0, 0.0)}}};
    in.tau = 0.1;
  } else if (name == "einstein") {
    pde::Einstein p;
    in.problem = p;
    in.layout = RegisterLayout::line("x", 3, 0.5);
    in.history.levels = {{{"g", wave(in.layout, 0.2, 0.4, 1.0)}}};
    in.tau = 0.01;
  } else if (name == "maxwell") {
    pde::Maxwell p;
    p.component = "z";
    in.problem = p;
    in.layout = RegisterLayout({{"x", 2, 0.5}, {"y", 1, 0.5}});
    in.history.levels = {{{"E_x", wave(in.layout, 0.3, 0.2, 0.0)},
                          {"E_y", wave(in.layout, 1.0, 0.0, 0.0)},
                          {"E_z", wave(in.layout, 0.1, 0.7, 0.0)},
                          {"B_x", wave(in.layout, 0.2, 0.5, 0.0)},
                          {"B_y", wave(in.layout, 0.2, 0.9, 0.0)},
                          {"B_z", wave(in.layout, 1.0, 0.0, 0.0)}}};
    in.tau = 0.05;
  } else if (name == "boussinesq") {
    in.problem = pde::Boussinesq{0.5, 0.1};
    in.layout = RegisterLayout::line("x", 3, 0.5);
    in.history.levels = {{{"u", wave(in.layout, 0.5, 0.0, 0.2)}},
                         {{"u", wave(in.layout, 0.49, 0.01, 0.2)}}};
    in.tau = 0.01;
  } else if (name == "lin_tsien") {
    in.problem = pde::LinTsien{};
    in.layout = RegisterLayout({{"x", 2, 0.5}, {"y", 1, 0.5}});
    in.history.levels = {{{"u", wave(in.layout, 0.5, 0.3, 0.1)}}};
    in.tau = 0.01;
  } else if (name == "camassa_holm") {
    in.problem = pde::CamassaHolm{1.0};
    in.layout = RegisterLayout::line("x", 3, 0.5);
    in.history.levels = {{{"u", wave(in.layout, 0.5, 0.0, 0.3)}}};
    in.tau = 0.01;
  } else if (name == "dsw") {
    in.problem = pde::DSW{};
    in.layout = RegisterLayout::line("x", 3, 0.5);
    in.history.levels = {{{"u", wave(in.layout, 0.5, 0.0, 0.2)},
                          {"v", wave(in.layout, 0.3, 0.8, 0.1)}}};
    in.tau = 0.01;
  } else if (name == "hunter_saxton") {
    in.problem = pde::HunterSaxton{};
    in.layout = RegisterLayout::line("x", 3, 0.5);
    in.history.levels = {{{"u", wave(in.layout, 0.5, 0.0, 0.1)}}};
    in.tau = 0.01;
  } else {
    throw std::invalid_argument("unknown pde '" + name + "'");
  }
  return in;
}

}  // namespace vqpde
