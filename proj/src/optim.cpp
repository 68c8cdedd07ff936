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

#include "vqpde/optim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace vqpde {

namespace {

using Vec = std::vector<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared bookkeeping for all methods: counts evaluations, sanitizes values,
// projects onto bounds and keeps the best point.
class Tracker {
 public:
  Tracker(const Objective& obj, const MinimizeOptions& opts, std::string method)
      : obj_(obj), opts_(opts) {
    trace_.method = std::move(method);
  }

  void project(Vec& x) const {
    if (!opts_.bounds) return;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::clamp(x[i], opts_.bounds->lower[i], opts_.bounds->upper[i]);
    }
  }

  double eval(const Vec& x) {
    double f = obj_.value(x);
    ++trace_.evaluations;
    if (!std::isfinite(f)) f = kInf;
    offer(x, f);
    return f;
  }

  // Evaluates a batch, possibly concurrently; results are offered in index
  // order so the outcome is independent of the worker count.
  Vec eval_batch(const std::vector<Vec>& xs) {
    Vec fs(xs.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min(opts_.workers, xs.size()));
    if (workers == 1) {
      for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = obj_.value(xs[i]);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < xs.size(); i = next++) {
            fs[i] = obj_.value(xs[i]);
          }
        });
      }
      for (auto& t : pool) t.join();
    }
    trace_.evaluations += xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(fs[i])) fs[i] = kInf;
      offer(xs[i], fs[i]);
    }
    return fs;
  }

  Vec grad(const Vec& x) {
    if (obj_.gradient) return obj_.gradient(x);
    Vec g = finite_diff_grad(obj_.value, x, 1e-6);
    trace_.evaluations += 2 * x.size();
    return g;
  }

  void start(const Vec& x0) {
    const double f0 = obj_.value(x0);
    ++trace_.evaluations;
    if (!std::isfinite(f0)) {
      throw std::domain_error("objective is not finite at the starting point");
    }
    trace_.x_best = x0;
    trace_.f_best = f0;
    trace_.best_values.push_back(f0);
  }

  void end_iteration() { trace_.best_values.push_back(trace_.f_best); }
  double best() const { return trace_.f_best; }
  std::size_t evaluations() const { return trace_.evaluations; }
  const Vec& best_x() const { return trace_.x_best; }

  OptimizationTrace finish(bool converged) {
    trace_.converged = converged;
    return std::move(trace_);
  }

 private:
  void offer(const Vec& x, double f) {
    if (f < trace_.f_best) {
      trace_.f_best = f;
      trace_.x_best = x;
    }
  }

  const Objective& obj_;
  const MinimizeOptions& opts_;
  OptimizationTrace trace_;
};

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

OptimizationTrace run(const opt::GradientDescent& c, const Objective& obj, Vec x,
                      const MinimizeOptions& o) {
  Tracker t(obj, o, "gradient_descent");
  t.project(x);
  t.start(x);
  double f = t.best();
  Vec g = t.grad(x);
  double step = c.step;
  bool converged = f <= c.f_tol;
  for (std::size_t it = 0; it < c.max_iters && !converged; ++it) {
    if (!(max_abs(g) > c.grad_tol)) {
      converged = true;
      break;
    }
    const double gg = std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
    Vec xn(x.size());
    double fn = kInf;
    double a = step;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] - a * g[i];
      t.project(xn);
      fn = t.eval(xn);
      if (fn <= f - 1e-4 * a * gg) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) {
      t.end_iteration();
      converged = true;  // no descent possible at working precision
      break;
    }
    Vec gn = t.grad(xn);
    // Barzilai-Borwein step for the next iteration
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = xn[i] - x[i];
      sy += s * (gn[i] - g[i]);
      ss += s * s;
    }
    step = sy > 0.0 ? ss / sy : std::min(2.0 * a, 1e3 * c.step);
    x = std::move(xn);
    g = std::move(gn);
    f = fn;
    t.end_iteration();
    if (f <= c.f_tol) converged = true;
  }
  return t.finish(converged || t.best() <= c.f_tol);
}

OptimizationTrace run(const opt::SPSA& c, const Objective& obj, Vec x,
                      const MinimizeOptions& o) {
  Tracker t(obj, o, "spsa");
  t.project(x);
  t.start(x);
  std::mt19937_64 rng(c.seed);
  std::bernoulli_distribution coin(0.5);
  const std::size_t n = x.size();
  bool converged = t.best() <= c.f_tol;
  Vec xp(n), xm(n), delta(n);
  for (std::size_t k = 0; k < c.max_iters && !converged; ++k) {
    const double ak = c.a / std::pow(static_cast<double>(k) + 1.0 + c.stability, c.alpha);
    const double ck = c.c / std::pow(static_cast<double>(k) + 1.0, c.gamma);
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = coin(rng) ? 1.0 : -1.0;
      xp[i] = x[i] + ck * delta[i];
      xm[i] = x[i] - ck * delta[i];
    }
    t.project(xp);
    t.project(xm);
    const Vec fs = t.eval_batch({xp, xm});
    if (std::isfinite(fs[0]) && std::isfinite(fs[1])) {
      const double d = (fs[0] - fs[1]) / (2.0 * ck);
      for (std::size_t i = 0; i < n; ++i) x[i] -= ak * d * delta[i];
      t.project(x);
    }
    t.eval(x);
    t.end_iteration();
    converged = t.best() <= c.f_tol;
  }
  return t.finish(converged);
}

OptimizationTrace run(const opt::NelderMead& c, const Objective& obj, Vec x0,
                      const MinimizeOptions& o) {
  Tracker t(obj, o, "nelder_mead");
  t.project(x0);
  t.start(x0);
  const std::size_t n = x0.size();
  std::vector<Vec> s(n + 1, x0);
  Vec fs(n + 1);
  fs[0] = t.best();
  for (std::size_t i = 0; i < n; ++i) {
    s[i + 1][i] += c.scale;
    t.project(s[i + 1]);
    fs[i + 1] = t.eval(s[i + 1]);
  }
  bool converged = t.best() <= c.f_tol;
  std::vector<std::size_t> order(n + 1);
  for (std::size_t it = 0; it < c.max_iters && !converged; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return fs[a] < fs[b] || (fs[a] == fs[b] && a < b);
    });
    const std::size_t best = order.front(), worst = order.back(),
                      second = order[n - 1];
    // collapsed simplex
    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d) {
        size = std::max(size, std::abs(s[i][d] - s[best][d]));
      }
    }
    if (size < 1e-14 || (fs[worst] - fs[best] <= 0.0 && size < 1e-10)) {
      t.end_iteration();
      break;
    }
    Vec centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += s[i][d] / static_cast<double>(n);
    }
    auto along = [&](double coef) {
      Vec p(n);
      for (std::size_t d = 0; d < n; ++d) {
        p[d] = centroid[d] + coef * (s[worst][d] - centroid[d]);
      }
      t.project(p);
      return p;
    };
    Vec xr = along(-1.0);
    const double fr = t.eval(xr);
    if (fr < fs[best]) {
      Vec xe = along(-2.0);
      const double fe = t.eval(xe);
      if (fe < fr) {
        s[worst] = std::move(xe);
        fs[worst] = fe;
      } else {
        s[worst] = std::move(xr);
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      s[worst] = std::move(xr);
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      Vec xc = along(outside ? -0.5 : 0.5);
      const double fc = t.eval(xc);
      if (fc < (outside ? fr : fs[worst])) {
        s[worst] = std::move(xc);
        fs[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d) {
            s[i][d] = s[best][d] + 0.5 * (s[i][d] - s[best][d]);
          }
          t.project(s[i]);
          fs[i] = t.eval(s[i]);
        }
      }
    }
    t.end_iteration();
    converged = t.best() <= c.f_tol;
  }
  return t.finish(converged);
}

OptimizationTrace run(const opt::CMAES& c, const Objective& obj, Vec x0,
                      const MinimizeOptions& o) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  Tracker t(obj, o, "cmaes");
  t.project(x0);
  t.start(x0);
  const std::size_t n = x0.size();
  const double N = static_cast<double>(n);
  const std::size_t lambda =
      c.population ? c.population : 4 + static_cast<std::size_t>(3.0 * std::log(N));
  const std::size_t mu = lambda / 2;
  VectorXd w(mu);
  for (std::size_t i = 0; i < mu; ++i) {
    w[i] = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i) + 1.0);
  }
  w /= w.sum();
  const double mueff = 1.0 / w.squaredNorm();
  const double cc = (4.0 + mueff / N) / (N + 4.0 + 2.0 * mueff / N);
  const double cs = (mueff + 2.0) / (N + mueff + 5.0);
  const double c1 = 2.0 / ((N + 1.3) * (N + 1.3) + mueff);
  const double cmu =
      std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((N + 2.0) * (N + 2.0) + mueff));
  const double damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (N + 1.0)) - 1.0) + cs;
  const double chiN = std::sqrt(N) * (1.0 - 1.0 / (4.0 * N) + 1.0 / (21.0 * N * N));

  VectorXd mean = Eigen::Map<const VectorXd>(x0.data(), static_cast<Eigen::Index>(n));
  double sigma = c.sigma0;
  VectorXd pc = VectorXd::Zero(n), ps = VectorXd::Zero(n);
  MatrixXd B = MatrixXd::Identity(n, n), C = MatrixXd::Identity(n, n);
  VectorXd D = VectorXd::Ones(n);
  MatrixXd invsqrtC = MatrixXd::Identity(n, n);

  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool converged = t.best() <= c.f_tol;
  std::size_t gen = 0;
  for (std::size_t it = 0; it < c.max_iters && !converged; ++it) {
    if (c.max_evals && t.evaluations() + lambda > c.max_evals) break;
    std::vector<Vec> xs(lambda, Vec(n));
    for (auto& x : xs) {
      VectorXd z(n);
      for (std::size_t d = 0; d < n; ++d) z[d] = normal(rng);
      const VectorXd y = B * D.asDiagonal() * z;
      for (std::size_t d = 0; d < n; ++d) x[d] = mean[d] + sigma * y[d];
      t.project(x);
    }
    const Vec fs = t.eval_batch(xs);
    ++gen;
    std::vector<std::size_t> idx(lambda);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });

    const VectorXd old = mean;
    mean.setZero();
    MatrixXd art(n, mu);
    for (std::size_t i = 0; i < mu; ++i) {
      const VectorXd xi = Eigen::Map<const VectorXd>(xs[idx[i]].data(), static_cast<Eigen::Index>(n));
      mean += w[i] * xi;
      art.col(static_cast<Eigen::Index>(i)) = (xi - old) / sigma;
    }
    const VectorXd step = (mean - old) / sigma;
    ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mueff) * (invsqrtC * step);
    const double psn = ps.norm();
    const double hsig_den =
        std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(gen)));
    const bool hsig = psn / hsig_den / chiN < 1.4 + 2.0 / (N + 1.0);
    pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * step;
    C = (1.0 - c1 - cmu) * C +
        c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * C) +
        cmu * art * w.asDiagonal() * art.transpose();
    sigma *= std::exp((cs / damps) * (psn / chiN - 1.0));

    C = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
    D = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    B = es.eigenvectors();
    invsqrtC = B * D.cwiseInverse().asDiagonal() * B.transpose();

    t.end_iteration();
    converged = t.best() <= c.f_tol;
    if (!std::isfinite(sigma) || sigma * D.maxCoeff() < 1e-15) break;
  }
  return t.finish(converged);
}

OptimizationTrace run(const opt::ParticleSwarm& c, const Objective& obj, Vec x0,
                      const MinimizeOptions& o) {
  Tracker t(obj, o, "particle_swarm");
  t.project(x0);
  t.start(x0);
  const std::size_t n = x0.size();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> init(-c.spread, c.spread);

  std::vector<Vec> pos(c.particles, x0), vel(c.particles, Vec(n, 0.0));
  for (std::size_t p = 1; p < c.particles; ++p) {
    for (std::size_t d = 0; d < n; ++d) {
      pos[p][d] += init(rng);
      vel[p][d] = 0.1 * init(rng);
    }
    t.project(pos[p]);
  }
  Vec pf = t.eval_batch(pos);
  std::vector<Vec> pbest = pos;
  const double vmax = 2.0 * c.spread;
  bool converged = t.best() <= c.f_tol;
  for (std::size_t it = 0; it < c.max_iters && !converged; ++it) {
    const Vec g = t.best_x();
    for (std::size_t p = 0; p < c.particles; ++p) {
      for (std::size_t d = 0; d < n; ++d) {
        const double r1 = u01(rng), r2 = u01(rng);
        double v = c.inertia * vel[p][d] + c.cognitive * r1 * (pbest[p][d] - pos[p][d]) +
                   c.social * r2 * (g[d] - pos[p][d]);
        vel[p][d] = std::clamp(v, -vmax, vmax);
        pos[p][d] += vel[p][d];
      }
      t.project(pos[p]);
    }
    const Vec fs = t.eval_batch(pos);
    for (std::size_t p = 0; p < c.particles; ++p) {
      if (fs[p] < pf[p]) {
        pf[p] = fs[p];
        pbest[p] = pos[p];
      }
    }
    t.end_iteration();
    converged = t.best() <= c.f_tol;
  }
  return t.finish(converged);
}

OptimizationTrace run(const opt::DifferentialEvolution& c, const Objective& obj,
                      Vec x0, const MinimizeOptions& o) {
  Tracker t(obj, o, "differential_evolution");
  t.project(x0);
  t.start(x0);
  const std::size_t n = x0.size();
  const std::size_t np = c.population;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> init(-c.spread, c.spread);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> dim(0, n - 1);

  std::vector<Vec> pop(np, x0);
  for (std::size_t p = 1; p < np; ++p) {
    for (std::size_t d = 0; d < n; ++d) pop[p][d] += init(rng);
    t.project(pop[p]);
  }
  Vec fit = t.eval_batch(pop);
  bool converged = t.best() <= c.f_tol;
  std::vector<Vec> trial(np, Vec(n));
  for (std::size_t it = 0; it < c.max_iters && !converged; ++it) {
    for (std::size_t p = 0; p < np; ++p) {
      std::size_t a, b, r;
      do a = pick(rng); while (a == p);
      do b = pick(rng); while (b == p || b == a);
      do r = pick(rng); while (r == p || r == a || r == b);
      const std::size_t jr = dim(rng);
      for (std::size_t d = 0; d < n; ++d) {
        trial[p][d] = (d == jr || u01(rng) < c.CR)
                          ? pop[a][d] + c.F * (pop[b][d] - pop[r][d])
                          : pop[p][d];
      }
      t.project(trial[p]);
    }
    const Vec fs = t.eval_batch(trial);
    for (std::size_t p = 0; p < np; ++p) {
      if (fs[p] <= fit[p]) {
        fit[p] = fs[p];
        pop[p] = trial[p];
      }
    }
    t.end_iteration();
    converged = t.best() <= c.f_tol;
  }
  return t.finish(converged);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate(const OptimizerConfig& config) {
  std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, opt::GradientDescent>) {
          require(c.step > 0 && std::isfinite(c.step), "optimizer.step must be > 0");
          require(c.max_iters >= 1, "optimizer.max_iters must be >= 1");
          require(c.grad_tol >= 0, "optimizer.grad_tol must be >= 0");
        } else if constexpr (std::is_same_v<T, opt::SPSA>) {
          require(c.a > 0 && c.c > 0, "optimizer.a and optimizer.c must be > 0");
          require(c.alpha > 0 && c.gamma > 0, "optimizer decay exponents must be > 0");
          require(c.stability >= 0, "optimizer.stability must be >= 0");
          require(c.max_iters >= 1, "optimizer.max_iters must be >= 1");
        } else if constexpr (std::is_same_v<T, opt::NelderMead>) {
          require(c.scale > 0 && std::isfinite(c.scale), "optimizer.scale must be > 0");
          require(c.max_iters >= 1, "optimizer.max_iters must be >= 1");
        } else if constexpr (std::is_same_v<T, opt::CMAES>) {
          require(c.population == 0 || c.population >= 2,
                  "optimizer.population must be >= 2");
          require(c.sigma0 > 0 && std::isfinite(c.sigma0), "optimizer.sigma0 must be > 0");
          require(c.max_iters >= 1, "optimizer.max_iters must be >= 1");
        } else if constexpr (std::is_same_v<T, opt::ParticleSwarm>) {
          require(c.particles >= 1, "optimizer.particles must be >= 1");
          require(c.inertia >= 0 && c.cognitive >= 0 && c.social >= 0,
                  "optimizer swarm coefficients must be >= 0");
          require(c.spread > 0, "optimizer.spread must be > 0");
          require(c.max_iters >= 1, "optimizer.max_iters must be >= 1");
        } else {
          require(c.population >= 4, "optimizer.population must be >= 4");
          require(c.F > 0 && c.F <= 2, "optimizer.F must be in (0, 2]");
          require(c.CR >= 0 && c.CR <= 1, "optimizer.CR must be in [0, 1]");
          require(c.spread > 0, "optimizer.spread must be > 0");
          require(c.max_iters >= 1, "optimizer.max_iters must be >= 1");
        }
      },
      config);
}

OptimizationTrace minimize(const Objective& objective, std::span<const double> x0,
                           const OptimizerConfig& config,
                           const MinimizeOptions& options) {
  if (!objective.value) throw std::invalid_argument("objective has no value function");
  if (x0.empty()) throw std::invalid_argument("empty starting point");
  validate(config);
  if (options.bounds) {
    const auto& b = *options.bounds;
    require(b.lower.size() == x0.size() && b.upper.size() == x0.size(),
            "bounds do not match the parameter count");
    for (std::size_t i = 0; i < x0.size(); ++i) {
      require(b.lower[i] <= b.upper[i], "lower bound above upper bound");
    }
  }
  Vec x(x0.begin(), x0.end());
  return std::visit([&](const auto& c) { return run(c, objective, x, options); },
                    config);
}

std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> x,
                                     double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  Vec xp(x.begin(), x.end());
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

std::string optimizer_name(const OptimizerConfig& config) {
  static const char* names[] = {"gradient_descent", "spsa",          "nelder_mead",
                                "cmaes",            "particle_swarm", "differential_evolution"};
  return names[config.index()];
}

OptimizerConfig with_seed(const OptimizerConfig& config, std::uint64_t seed) {
  OptimizerConfig out = config;
  std::visit(
      [&](auto& c) {
        if constexpr (requires { c.seed; }) c.seed = seed;
      },
      out);
  return out;
}

}  // namespace vqpde
