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

#include "vqpde/opexpr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace vqpde {

namespace {

std::string format_coeff(Complex c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.12g,%.12g)", c.real() + 0.0, c.imag() + 0.0);
  return buf;
}

std::string atoms_key(const std::vector<OpAtom>& atoms) {
  if (atoms.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) s += ' ';
    s += to_string(atoms[i]);
  }
  return s;
}

std::vector<OpTerm> canonical_terms(std::vector<OpTerm> terms) {
  std::map<std::string, OpTerm> merged;
  for (auto& t : terms) {
    if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag())) {
      throw std::invalid_argument("operator coefficient must be finite");
    }
    t.atoms = canonical_atoms(t.atoms);
    const std::string key = atoms_key(t.atoms);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, std::move(t));
    } else {
      it->second.coeff += t.coeff;
    }
  }
  std::vector<OpTerm> out;
  out.reserve(merged.size());
  for (auto& [key, t] : merged) {
    if (t.coeff != Complex{}) out.push_back(std::move(t));
  }
  return out;
}

struct AxisInfo {
  std::size_t offset;
  std::size_t size;
};

// Buffer-level kernels; apply_term uses these to avoid one allocation per atom.
void shift_into(const std::vector<Complex>& in, std::vector<Complex>& out,
                AxisInfo ax, bool forward) {
  const std::size_t mask = (ax.size - 1) << ax.offset;
  const std::size_t step = forward ? 1 : ax.size - 1;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::size_t j = (i & mask) >> ax.offset;
    out[(i & ~mask) | (((j + step) & (ax.size - 1)) << ax.offset)] = in[i];
  }
}

}  // namespace

bool OpTerm::is_unitary() const {
  return std::none_of(atoms.begin(), atoms.end(), [](const OpAtom& a) {
    return std::holds_alternative<atom::Diag>(a);
  });
}

std::string to_string(const OpAtom& a) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, atom::Identity>) {
          return "1";
        } else if constexpr (std::is_same_v<T, atom::Shift>) {
          return "A[" + x.axis + "]";
        } else if constexpr (std::is_same_v<T, atom::ShiftDag>) {
          return "Ad[" + x.axis + "]";
        } else {
          return "D[" + x.field + "]";
        }
      },
      a);
}

std::string to_string(const OpTerm& t) {
  return format_coeff(t.coeff) + " | " + atoms_key(t.atoms);
}

std::vector<OpAtom> canonical_atoms(const std::vector<OpAtom>& atoms) {
  std::vector<OpAtom> out;
  std::map<std::string, long> run;
  auto flush = [&] {
    for (const auto& [axis, power] : run) {
      for (long k = 0; k < std::abs(power); ++k) {
        if (power > 0) {
          out.emplace_back(atom::Shift{axis});
        } else {
          out.emplace_back(atom::ShiftDag{axis});
        }
      }
    }
    run.clear();
  };
  for (const auto& a : atoms) {
    if (const auto* s = std::get_if<atom::Shift>(&a)) {
      run[s->axis] += 1;
    } else if (const auto* d = std::get_if<atom::ShiftDag>(&a)) {
      run[d->axis] -= 1;
    } else if (std::holds_alternative<atom::Diag>(a)) {
      flush();
      out.push_back(a);
    }
  }
  flush();
  return out;
}

OpExpr::OpExpr(std::vector<OpTerm> terms) : terms_(canonical_terms(std::move(terms))) {}

OpExpr OpExpr::identity(Complex coeff) { return OpExpr({OpTerm{coeff, {}}}); }

OpExpr OpExpr::shift(const std::string& axis) {
  return OpExpr({OpTerm{1.0, {atom::Shift{axis}}}});
}

OpExpr OpExpr::shift_dag(const std::string& axis) {
  return OpExpr({OpTerm{1.0, {atom::ShiftDag{axis}}}});
}

OpExpr OpExpr::diag(const std::string& field) {
  return OpExpr({OpTerm{1.0, {atom::Diag{field}}}});
}

bool OpExpr::is_unitary_sum() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const OpTerm& t) { return t.is_unitary(); });
}

std::vector<std::string> OpExpr::fields() const {
  std::set<std::string> names;
  for (const auto& t : terms_) {
    for (const auto& a : t.atoms) {
      if (const auto* d = std::get_if<atom::Diag>(&a)) names.insert(d->field);
    }
  }
  return {names.begin(), names.end()};
}

std::string OpExpr::to_string() const {
  std::string s;
  for (const auto& t : terms_) {
    s += vqpde::to_string(t);
    s += '\n';
  }
  return s;
}

OpExpr OpExpr::operator+(const OpExpr& o) const {
  std::vector<OpTerm> t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return OpExpr(std::move(t));
}

OpExpr OpExpr::operator-(const OpExpr& o) const { return *this + (-o); }

OpExpr OpExpr::operator-() const { return *this * Complex(-1.0, 0.0); }

OpExpr OpExpr::operator*(const OpExpr& o) const {
  std::vector<OpTerm> out;
  out.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_) {
    for (const auto& b : o.terms_) {
      OpTerm t{a.coeff * b.coeff, a.atoms};
      t.atoms.insert(t.atoms.end(), b.atoms.begin(), b.atoms.end());
      out.push_back(std::move(t));
    }
  }
  return OpExpr(std::move(out));
}

OpExpr OpExpr::operator*(Complex c) const {
  std::vector<OpTerm> t = terms_;
  for (auto& term : t) term.coeff *= c;
  return OpExpr(std::move(t));
}

OpExpr grad_op(const std::string& axis, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("grid spacing must be positive");
  }
  return (OpExpr::shift(axis) - OpExpr::identity()) * (1.0 / spacing);
}

OpExpr laplacian_op(const std::string& axis, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("grid spacing must be positive");
  }
  return (OpExpr::shift_dag(axis) - OpExpr::identity(2.0) + OpExpr::shift(axis)) *
         (1.0 / (spacing * spacing));
}

OpExpr expand_product(const std::vector<OpExpr>& factors) {
  if (factors.empty()) throw std::invalid_argument("empty factor list");
  OpExpr acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = acc * factors[i];
  return acc;
}

OpExpr adjoint(const OpExpr& expr) {
  std::vector<OpTerm> out;
  for (const auto& t : expr.terms()) {
    OpTerm a{std::conj(t.coeff), {}};
    for (auto it = t.atoms.rbegin(); it != t.atoms.rend(); ++it) {
      if (const auto* s = std::get_if<atom::Shift>(&*it)) {
        a.atoms.emplace_back(atom::ShiftDag{s->axis});
      } else if (const auto* d = std::get_if<atom::ShiftDag>(&*it)) {
        a.atoms.emplace_back(atom::Shift{d->axis});
      } else {
        a.atoms.push_back(*it);
      }
    }
    out.push_back(std::move(a));
  }
  return OpExpr(std::move(out));
}

QuantumState apply_term(const OpTerm& term, const QuantumState& state,
                        const RegisterLayout& layout,
                        const FieldBindings& bindings) {
  if (layout.total_qubits() != state.n_qubits()) {
    throw std::invalid_argument("layout does not match state size");
  }
  std::vector<Complex> cur(state.amplitudes().begin(), state.amplitudes().end());
  std::vector<Complex> tmp(cur.size());
  for (auto it = term.atoms.rbegin(); it != term.atoms.rend(); ++it) {
    if (const auto* s = std::get_if<atom::Shift>(&*it)) {
      shift_into(cur, tmp, {layout.qubit_offset(s->axis),
                            std::size_t{1} << layout.axis(s->axis).qubits},
                 true);
      cur.swap(tmp);
    } else if (const auto* d = std::get_if<atom::ShiftDag>(&*it)) {
      shift_into(cur, tmp, {layout.qubit_offset(d->axis),
                            std::size_t{1} << layout.axis(d->axis).qubits},
                 false);
      cur.swap(tmp);
    } else if (const auto* g = std::get_if<atom::Diag>(&*it)) {
      auto f = bindings.find(g->field);
      if (f == bindings.end()) {
        throw std::invalid_argument("unbound field '" + g->field + "'");
      }
      if (f->second.size() != cur.size()) {
        throw std::invalid_argument("field '" + g->field +
                                    "' does not match the grid size");
      }
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= f->second[i];
    }
  }
  for (auto& a : cur) a *= term.coeff;
  return QuantumState(state.n_qubits(), std::move(cur));
}

QuantumState apply_expr(const OpExpr& expr, const QuantumState& state,
                        const RegisterLayout& layout,
                        const FieldBindings& bindings) {
  if (layout.total_qubits() != state.n_qubits()) {
    throw std::invalid_argument("layout does not match state size");
  }
  std::vector<Complex> acc(state.dim());
  for (const auto& t : expr.terms()) {
    const QuantumState r = apply_term(t, state, layout, bindings);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += r[i];
  }
  return QuantumState(state.n_qubits(), std::move(acc));
}

std::vector<double> apply_expr_real(const OpExpr& expr,
                                    std::span<const double> field,
                                    const RegisterLayout& layout,
                                    const FieldBindings& bindings) {
  if (field.size() != layout.dim()) {
    throw std::invalid_argument("field does not match the grid size");
  }
  const QuantumState s(layout.total_qubits(),
                       std::vector<Complex>(field.begin(), field.end()));
  const QuantumState r = apply_expr(expr, s, layout, bindings);
  std::vector<double> out(r.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r[i].real();
  return out;
}

}  // namespace vqpde
