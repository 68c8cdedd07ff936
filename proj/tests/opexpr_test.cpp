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
#include "vqpde/opexpr.hpp"

namespace vqpde {
namespace {

using testing::Dense;
using testing::Gen;

// Dense matrix of an expression, column by column through apply_expr.
testing::CMat matrix_of(const OpExpr& e, const RegisterLayout& layout, const FieldBindings& b) {
  const auto n = static_cast<Eigen::Index>(layout.dim());
  testing::CMat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m.col(j) = testing::to_vec(
        apply_expr(e, QuantumState::basis(layout.total_qubits(), static_cast<std::size_t>(j)),
                   layout, b));
  }
  return m;
}

TEST(OpExpr, ShiftTimesAdjointIsIdentity) {
  const auto e = OpExpr::shift("x") * OpExpr::shift_dag("x");
  EXPECT_EQ(e, OpExpr::identity());
  EXPECT_EQ(e.to_string(), "(1,0) | 1\n");
}

TEST(OpExpr, LikeTermsMergeAndZerosDrop) {
  const auto e = OpExpr::shift("x") + OpExpr::shift("x") * 2.0 - OpExpr::shift("x") * 3.0;
  EXPECT_TRUE(e.empty());
  const auto f = OpExpr::shift("x") * OpExpr::shift("y") - OpExpr::shift("y") * OpExpr::shift("x");
  EXPECT_TRUE(f.empty());
}

TEST(OpExpr, DiagBlocksCommutation) {
  const auto e = OpExpr::shift("x") * OpExpr::diag("f") * OpExpr::shift_dag("x");
  ASSERT_EQ(e.terms().size(), 1u);
  EXPECT_EQ(e.terms()[0].atoms.size(), 3u);
  EXPECT_FALSE(e.is_unitary_sum());
  EXPECT_EQ(e.fields(), std::vector<std::string>{"f"});
}

TEST(OpExpr, GradAndLaplacianMatchDenseExactly) {
  const RegisterLayout layout({{"x", 2, 0.5}, {"y", 2, 0.25}});
  const Dense dense(layout);
  for (const char* ax : {"x", "y"}) {
    const double d = layout.axis(ax).spacing;
    const auto g = matrix_of(grad_op(ax, d), layout, {});
    const auto l = matrix_of(laplacian_op(ax, d), layout, {});
    EXPECT_EQ((g - dense.grad(ax).cast<Complex>()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((l - dense.lap(ax).cast<Complex>()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(OpExpr, LaplacianEigenvalueOnSine) {
  for (std::size_t nq : {3u, 4u, 5u}) {
    const double dx = 0.3;
    const auto layout = RegisterLayout::line("x", nq, dx);
    const std::size_t n = layout.dim();
    for (std::size_t m = 1; m < n / 2; ++m) {
      const double k = 2.0 * std::numbers::pi * double(m) / (double(n) * dx);
      std::vector<double> f(n);
      for (std::size_t j = 0; j < n; ++j) f[j] = std::sin(k * double(j) * dx);
      const auto lf = apply_expr_real(laplacian_op("x", dx), f, layout, {});
      const double lambda = -(2.0 / (dx * dx)) * (1.0 - std::cos(k * dx));
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(lf[j], lambda * f[j], 1e-12);
    }
  }
}

TEST(OpExpr, GradOfConstantVanishes) {
  const auto layout = RegisterLayout::line("x", 3, 0.7);
  const auto g = apply_expr_real(grad_op("x", 0.7), std::vector<double>(8, 2.5), layout, {});
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(OpExpr, ProductMatchesMatrixProduct) {
  Gen g(21);
  const RegisterLayout layout({{"x", 2, 0.5}, {"y", 1, 1.0}});
  const Dense dense(layout);
  const FieldBindings b{{"f", g.field(8)}, {"h", g.field(8)}};
  const auto a = grad_op("x", 0.5) - OpExpr::diag("f") * laplacian_op("y", 1.0) * 0.3;
  const auto c = OpExpr::diag("h") * grad_op("y", 1.0) + OpExpr::identity(Complex(0.2, 0.1));
  const testing::CMat want = (dense.grad("x") - 0.3 * Dense::D(b.at("f")) * dense.lap("y")).cast<Complex>() *
                    ((Dense::D(b.at("h")) * dense.grad("y")).cast<Complex>() +
                     Complex(0.2, 0.1) * testing::CMat::Identity(8, 8));
  EXPECT_LT((matrix_of(a * c, layout, b) - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(expand_product({a, c}), a * c);
}

TEST(OpExpr, AdjointIsConjugateTranspose) {
  Gen g(22);
  const RegisterLayout layout({{"x", 3, 0.5}});
  const FieldBindings b{{"f", g.field(8)}};
  const auto e = OpExpr::diag("f") * grad_op("x", 0.5) * Complex(0.3, -0.7) +
                 laplacian_op("x", 0.5) * OpExpr::diag("f");
  const auto m = matrix_of(e, layout, b);
  EXPECT_LT((matrix_of(adjoint(e), layout, b) - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OpExpr, CanonicalFormIsStable) {
  const auto e = laplacian_op("x", 1.0) * laplacian_op("x", 1.0);
  EXPECT_EQ(e.to_string(),
            "(6,0) | 1\n"
            "(-4,0) | A[x]\n"
            "(1,0) | A[x] A[x]\n"
            "(-4,0) | Ad[x]\n"
            "(1,0) | Ad[x] Ad[x]\n");
}

TEST(OpExpr, Errors) {
  EXPECT_THROW(grad_op("x", 0.0), std::invalid_argument);
  EXPECT_THROW(laplacian_op("x", -1.0), std::invalid_argument);
  EXPECT_THROW(expand_product({}), std::invalid_argument);
  const auto layout = RegisterLayout::line("x", 2);
  EXPECT_THROW(apply_expr(OpExpr::diag("missing"), QuantumState(2), layout, {}),
               std::invalid_argument);
  EXPECT_THROW(apply_expr(OpExpr::shift("q"), QuantumState(2), layout, {}), std::invalid_argument);
}

}  // namespace
}  // namespace vqpde
