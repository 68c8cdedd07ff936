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
#include <string>
#include <variant>
#include <vector>

#include "vqpde/statevec.hpp"

namespace vqpde {

namespace atom {
struct Identity {
  bool operator==(const Identity&) const = default;
};
/// A on the named axis: j -> j + 1.
struct Shift {
  std::string axis;
  bool operator==(const Shift&) const = default;
};
/// A^dagger on the named axis.
struct ShiftDag {
  std::string axis;
  bool operator==(const ShiftDag&) const = default;
};
/// Pointwise multiplication by a bound real field.
struct Diag {
  std::string field;
  bool operator==(const Diag&) const = default;
};
}  // namespace atom

using OpAtom = std::variant<atom::Identity, atom::Shift, atom::ShiftDag, atom::Diag>;

/// Field name -> samples on the flattened grid.
using FieldBindings = std::map<std::string, std::vector<double>>;

/// coeff * atoms[0] * atoms[1] * ... ; the last atom acts first.
struct OpTerm {
  Complex coeff{1.0, 0.0};
  std::vector<OpAtom> atoms;

  bool is_unitary() const;  // no Diag atoms
  bool operator==(const OpTerm&) const = default;
};

std::string to_string(const OpAtom& a);
std::string to_string(const OpTerm& t);

/// Sum of OpTerms kept in canonical form:
///  - runs of shift atoms between Diag atoms collapse to a net power per
///    axis, axes sorted by label (cyclic shifts on distinct axes commute);
///  - Identity atoms are removed;
///  - terms with equal atom sequences are merged, exact zeros dropped;
///  - terms are sorted by their atom key.
class OpExpr {
 public:
  OpExpr() = default;
  explicit OpExpr(std::vector<OpTerm> terms);

  static OpExpr identity(Complex coeff = 1.0);
  static OpExpr shift(const std::string& axis);
  static OpExpr shift_dag(const std::string& axis);
  static OpExpr diag(const std::string& field);

  const std::vector<OpTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  /// True when no term contains a Diag atom.
  bool is_unitary_sum() const;
  /// Names of all Diag fields referenced, sorted, unique.
  std::vector<std::string> fields() const;

  /// One term per line, "coeff | atoms", canonical order.
  std::string to_string() const;

  OpExpr operator+(const OpExpr& o) const;
  OpExpr operator-(const OpExpr& o) const;
  OpExpr operator-() const;
  /// Product with this on the left: (*this) * o.
  OpExpr operator*(const OpExpr& o) const;
  OpExpr operator*(Complex c) const;
  friend OpExpr operator*(Complex c, const OpExpr& e) { return e * c; }
  OpExpr operator*(double c) const { return *this * Complex(c, 0.0); }
  friend OpExpr operator*(double c, const OpExpr& e) { return e * Complex(c, 0.0); }

  bool operator==(const OpExpr& o) const = default;

 private:
  std::vector<OpTerm> terms_;
};

/// Canonicalizes a single atom product (coefficient untouched).
std::vector<OpAtom> canonical_atoms(const std::vector<OpAtom>& atoms);

/// (A_axis - 1) / spacing. Throws std::invalid_argument for spacing <= 0.
OpExpr grad_op(const std::string& axis, double spacing);
/// (A^dagger - 2 + A) / spacing^2.
OpExpr laplacian_op(const std::string& axis, double spacing);

/// Full distribution of factors[0] * factors[1] * ...; throws on an empty list.
OpExpr expand_product(const std::vector<OpExpr>& factors);

OpExpr adjoint(const OpExpr& expr);

/// Applies a single term (coefficient included).
QuantumState apply_term(const OpTerm& term, const QuantumState& state,
                        const RegisterLayout& layout,
                        const FieldBindings& bindings);

/// Throws std::invalid_argument for unbound fields, unknown axes or a
/// layout/state size mismatch.
QuantumState apply_expr(const OpExpr& expr, const QuantumState& state,
                        const RegisterLayout& layout,
                        const FieldBindings& bindings);

/// Convenience: apply_expr on a real field (returns the real part).
std::vector<double> apply_expr_real(const OpExpr& expr,
                                    std::span<const double> field,
                                    const RegisterLayout& layout,
                                    const FieldBindings& bindings);

}  // namespace vqpde
