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

// Shared test helpers: seeded generators and dense reference matrices that
// do not go through the library's operator code.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "vqpde/statevec.hpp"

namespace vqpde::testing {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  std::vector<double> field(std::size_t n, double scale = 1.0) {
    std::vector<double> f(n);
    for (auto& v : f) v = normal(scale);
    return f;
  }
  std::vector<double> angles(std::size_t n) {
    std::vector<double> a(n);
    for (auto& v : a) v = uniform(-M_PI, M_PI);
    return a;
  }
  QuantumState state(std::size_t n_qubits) {
    std::vector<Complex> a(std::size_t{1} << n_qubits);
    double s = 0.0;
    for (auto& z : a) {
      z = {normal(), normal()};
      s += std::norm(z);
    }
    for (auto& z : a) z /= std::sqrt(s);
    return QuantumState(n_qubits, std::move(a));
  }

 private:
  std::mt19937_64 rng_;
};

inline CVec to_vec(const QuantumState& s) {
  CVec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

inline QuantumState from_vec(const CVec& v, std::size_t n_qubits) {
  return QuantumState(n_qubits, std::vector<Complex>(v.data(), v.data() + v.size()));
}

inline double max_abs_diff(const QuantumState& a, const QuantumState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Dense periodic stencils from explicit grid coordinates: axis sizes and
/// the flattened index j = c_0 + N_0 c_1 + N_0 N_1 c_2.
class Dense {
 public:
  explicit Dense(const RegisterLayout& layout) : layout_(layout) {
    std::size_t stride = 1;
    for (const auto& a : layout.axes()) {
      stride_.push_back(stride);
      size_.push_back(std::size_t{1} << a.qubits);
      stride *= size_.back();
    }
    n_ = stride;
  }
  Eigen::Index n() const { return static_cast<Eigen::Index>(n_); }
  RMat I() const { return RMat::Identity(n(), n()); }
  /// (A f)_j = f_{j - e}; A maps basis |j> to |j + e>.
  RMat A(const std::string& axis) const {
    const std::size_t a = layout_.axis_index(axis);
    RMat m = RMat::Zero(n(), n());
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t c = (j / stride_[a]) % size_[a];
      const std::size_t to = j + ((c + 1) % size_[a]) * stride_[a] - c * stride_[a];
      m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(j)) = 1.0;
    }
    return m;
  }
  RMat grad(const std::string& axis) const {
    return (A(axis) - I()) / layout_.axis(axis).spacing;
  }
  RMat lap(const std::string& axis) const {
    const double d = layout_.axis(axis).spacing;
    const RMat s = A(axis);
    return (s.transpose() - 2.0 * I() + s) / (d * d);
  }
  static RMat D(const std::vector<double>& f) {
    return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()))
        .asDiagonal();
  }

 private:
  const RegisterLayout& layout_;
  std::vector<std::size_t> stride_, size_;
  std::size_t n_ = 1;
};

inline Eigen::VectorXd rvec(const std::vector<double>& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}
inline std::vector<double> stdv(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace vqpde::testing
