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

#include "vqpde/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace vqpde {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxConfigQubits = 12;

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  require_object(j, path);
  for (const auto& [k, _] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) ==
        keys.end()) {
      throw ConfigError(path + "." + k, "unknown key");
    }
  }
}

double get_num(const json& j, const char* key, const std::string& path, double def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path + "." + key, "must be finite");
  return d;
}

double get_positive(const json& j, const char* key, const std::string& path, double def) {
  const double d = get_num(j, key, path, def);
  if (!(d > 0)) throw ConfigError(path + "." + key, "must be > 0");
  return d;
}

std::size_t get_count(const json& j, const char* key, const std::string& path, std::size_t def,
                      std::size_t min = 1) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
    throw ConfigError(path + "." + key, "expected an integer >= " + std::to_string(min));
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& j, const char* key, const std::string& path,
                       std::uint64_t def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                  v.get<long long>() < 0)) {
    throw ConfigError(path + "." + key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_str(const json& j, const char* key, const std::string& path,
                    const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) throw ConfigError(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

bool get_bool(const json& j, const char* key, const std::string& path, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) throw ConfigError(path + "." + key, "expected true or false");
  return j.at(key).get<bool>();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RegisterLayout parse_grid(const json& j) {
  allow_keys(j, "grid", {"axes"});
  if (!j.contains("axes") || !j.at("axes").is_array() || j.at("axes").empty()) {
    throw ConfigError("grid.axes", "expected a non-empty list");
  }
  std::vector<Axis> axes;
  std::set<std::string> seen;
  std::size_t total = 0;
  for (std::size_t i = 0; i < j.at("axes").size(); ++i) {
    const std::string p = "grid.axes[" + std::to_string(i) + "]";
    const json& a = j.at("axes")[i];
    allow_keys(a, p, {"label", "qubits", "spacing"});
    Axis ax;
    ax.label = get_str(a, "label", p, "");
    if (ax.label.empty()) throw ConfigError(p + ".label", "required");
    if (!seen.insert(ax.label).second) throw ConfigError(p + ".label", "duplicate axis label");
    ax.qubits = get_count(a, "qubits", p, 0);
    if (ax.qubits == 0) throw ConfigError(p + ".qubits", "required");
    ax.spacing = get_positive(a, "spacing", p, 1.0);
    total += ax.qubits;
    axes.push_back(ax);
  }
  if (total > kMaxConfigQubits) {
    throw ConfigError("grid.axes", "at most " + std::to_string(kMaxConfigQubits) +
                                       " qubits in total");
  }
  return RegisterLayout(std::move(axes));
}

pde::StressEnergyModel parse_tensor(const json& j, const std::string& path) {
  const std::string kind = get_str(j, "kind", path, "");
  if (kind == "point_particle") {
    allow_keys(j, path, {"kind", "mass", "v_mu", "v_nu", "speed", "x0"});
    pde::PointParticle p;
    p.mass = get_num(j, "mass", path, p.mass);
    p.v_mu = get_num(j, "v_mu", path, p.v_mu);
    p.v_nu = get_num(j, "v_nu", path, p.v_nu);
    p.speed = get_num(j, "speed", path, p.speed);
    p.x0 = get_num(j, "x0", path, p.x0);
    return p;
  }
  if (kind == "fluid") {
    allow_keys(j, path, {"kind", "rho_e", "pressure", "u_mu", "u_nu"});
    pde::EquilibriumFluid f;
    f.rho_e = get_num(j, "rho_e", path, f.rho_e);
    f.pressure = get_num(j, "pressure", path, f.pressure);
    f.u_mu = get_num(j, "u_mu", path, f.u_mu);
    f.u_nu = get_num(j, "u_nu", path, f.u_nu);
    return f;
  }
  if (kind == "electromagnetic") {
    allow_keys(j, path, {"kind", "f_mu_alpha", "f_nu_beta", "invariant", "mu0"});
    pde::Electromagnetic e;
    e.f_mu_alpha = get_num(j, "f_mu_alpha", path, e.f_mu_alpha);
    e.f_nu_beta = get_num(j, "f_nu_beta", path, e.f_nu_beta);
    e.invariant = get_num(j, "invariant", path, e.invariant);
    e.mu0 = get_num(j, "mu0", path, e.mu0);
    return e;
  }
  throw ConfigError(path + ".kind", "expected point_particle, fluid or electromagnetic");
}

std::vector<double> parse_samples(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_array()) throw ConfigError(path, "expected a list of numbers");
  if (j.size() != n) {
    throw ConfigError(path, "expected " + std::to_string(n) + " samples, got " +
                                std::to_string(j.size()));
  }
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw ConfigError(path, "samples must be finite numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<double> parse_initial_field(const json& j, const std::string& path,
                                        const RegisterLayout& layout) {
  require_object(j, path);
  if (j.contains("samples")) {
    allow_keys(j, path, {"samples"});
    return parse_samples(j.at("samples"), path + ".samples", layout.dim());
  }
  if (j.contains("reference")) {
    allow_keys(j, path, {"reference"});
    const ReferenceSolution r = parse_reference(j.at("reference"), path + ".reference");
    try {
      return exact_field(r, layout, 0.0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ".reference", e.what());
    }
  }
  const std::string profile = get_str(j, "profile", path, "");
  std::vector<double> f(layout.dim(), 0.0);
  if (profile == "zero") {
    allow_keys(j, path, {"profile"});
    return f;
  }
  if (profile == "constant") {
    allow_keys(j, path, {"profile", "value"});
    std::fill(f.begin(), f.end(), get_num(j, "value", path, 1.0));
    return f;
  }
  if (profile == "sine" || profile == "cosine" || profile == "gaussian") {
    allow_keys(j, path, {"profile", "amplitude", "mode", "axis", "offset", "center", "width"});
    const std::string label = get_str(j, "axis", path, layout.axes().front().label);
    if (!layout.has_axis(label)) throw ConfigError(path + ".axis", "unknown axis '" + label + "'");
    const std::size_t a = layout.axis_index(label);
    const Axis& ax = layout.axes()[a];
    const double length = static_cast<double>(std::size_t{1} << ax.qubits) * ax.spacing;
    const double amp = get_num(j, "amplitude", path, 1.0);
    const double offset = get_num(j, "offset", path, 0.0);
    const double mode = get_num(j, "mode", path, 1.0);
    const double center = get_num(j, "center", path, 0.5 * length);
    const double width = get_positive(j, "width", path, 0.125 * length);
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double x = layout.position(k)[a];
      double v;
      if (profile == "gaussian") {
        v = std::exp(-0.5 * (x - center) * (x - center) / (width * width));
      } else {
        const double arg = 2.0 * std::numbers::pi * mode * x / length;
        v = profile == "sine" ? std::sin(arg) : std::cos(arg);
      }
      f[k] = offset + amp * v;
    }
    return f;
  }
  throw ConfigError(path, "expected samples, reference, or profile zero|constant|sine|cosine|gaussian");
}

AnsatzSpec parse_ansatz(const json& j, const std::string& path, std::size_t n_qubits) {
  allow_keys(j, path, {"layers", "entangler", "qft", "rotations"});
  AnsatzSpec s;
  s.n_qubits = n_qubits;
  s.layers = get_count(j, "layers", path, 1);
  try {
    s.entangler = entangler_from_string(get_str(j, "entangler", path, "chain"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".entangler", e.what());
  }
  s.qft_block = get_bool(j, "qft", path, false);
  if (j.contains("rotations")) {
    const json& r = j.at("rotations");
    if (!r.is_array() || r.empty()) throw ConfigError(path + ".rotations", "expected a non-empty list");
    s.rotation_axes.clear();
    for (const auto& a : r) {
      if (a == "Y") {
        s.rotation_axes.push_back(RotationAxis::Y);
      } else if (a == "Z") {
        s.rotation_axes.push_back(RotationAxis::Z);
      } else {
        throw ConfigError(path + ".rotations", "entries must be \"Y\" or \"Z\"");
      }
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return s;
}

template <class T>
std::vector<T> parse_list_or_one(const json& root, const char* one, const char* many,
                                 const std::function<T(const json&, const std::string&)>& parse,
                                 std::optional<T> def) {
  if (root.contains(one) && root.contains(many)) {
    throw ConfigError(many, std::string("cannot be combined with ") + one);
  }
  std::vector<T> out;
  if (root.contains(many)) {
    const json& l = root.at(many);
    if (!l.is_array() || l.empty()) throw ConfigError(many, "expected a non-empty list");
    for (std::size_t i = 0; i < l.size(); ++i) {
      out.push_back(parse(l[i], std::string(many) + "[" + std::to_string(i) + "]"));
    }
  } else if (root.contains(one)) {
    out.push_back(parse(root.at(one), one));
  } else if (def) {
    out.push_back(*def);
  } else {
    throw ConfigError(one, "required");
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string fnv1a_hex(const std::string& s) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

std::string canonical_optimizer_name(const std::string& name) {
  static const std::map<std::string, std::string> names = {
      {"gradient_descent", "gradient_descent"}, {"gd", "gradient_descent"},
      {"spsa", "spsa"},
      {"nelder_mead", "nelder_mead"}, {"imfil", "nelder_mead"},
      {"cmaes", "cmaes"}, {"cma", "cmaes"}, {"nevergrad", "cmaes"}, {"vd-cma", "cmaes"},
      {"pso", "particle_swarm"}, {"particle_swarm", "particle_swarm"}, {"cpso", "particle_swarm"},
      {"de", "differential_evolution"}, {"differential_evolution", "differential_evolution"},
      {"na", "differential_evolution"},
  };
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto it = names.find(lower);
  if (it == names.end()) throw std::invalid_argument("unknown optimizer '" + name + "'");
  return it->second;
}

OptimizerConfig parse_optimizer(const json& j, const std::string& path) {
  require_object(j, path);
  std::string method;
  try {
    method = canonical_optimizer_name(get_str(j, "method", path, ""));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".method", e.what());
  }
  OptimizerConfig out;
  if (method == "gradient_descent") {
    allow_keys(j, path, {"method", "step", "max_iters", "grad_tol", "f_tol"});
    opt::GradientDescent c;
    c.step = get_positive(j, "step", path, c.step);
    c.max_iters = get_count(j, "max_iters", path, c.max_iters);
    c.grad_tol = get_num(j, "grad_tol", path, c.grad_tol);
    c.f_tol = get_num(j, "f_tol", path, c.f_tol);
    out = c;
  } else if (method == "spsa") {
    allow_keys(j, path, {"method", "a", "c", "alpha", "gamma", "stability", "max_iters", "f_tol"});
    opt::SPSA c;
    c.a = get_positive(j, "a", path, c.a);
    c.c = get_positive(j, "c", path, c.c);
    c.alpha = get_positive(j, "alpha", path, c.alpha);
    c.gamma = get_positive(j, "gamma", path, c.gamma);
    c.stability = get_num(j, "stability", path, c.stability);
    c.max_iters = get_count(j, "max_iters", path, c.max_iters);
    c.f_tol = get_num(j, "f_tol", path, c.f_tol);
    out = c;
  } else if (method == "nelder_mead") {
    allow_keys(j, path, {"method", "scale", "max_iters", "f_tol"});
    opt::NelderMead c;
    c.scale = get_positive(j, "scale", path, c.scale);
    c.max_iters = get_count(j, "max_iters", path, c.max_iters);
    c.f_tol = get_num(j, "f_tol", path, c.f_tol);
    out = c;
  } else if (method == "cmaes") {
    allow_keys(j, path, {"method", "population", "sigma0", "max_iters", "max_evals", "f_tol"});
    opt::CMAES c;
    c.population = get_count(j, "population", path, c.population, 0);
    c.sigma0 = get_positive(j, "sigma0", path, c.sigma0);
    c.max_iters = get_count(j, "max_iters", path, c.max_iters);
    c.max_evals = get_count(j, "max_evals", path, c.max_evals, 0);
    c.f_tol = get_num(j, "f_tol", path, c.f_tol);
    out = c;
  } else if (method == "particle_swarm") {
    allow_keys(j, path, {"method", "particles", "inertia", "cognitive", "social", "spread",
                         "max_iters", "f_tol"});
    opt::ParticleSwarm c;
    c.particles = get_count(j, "particles", path, c.particles);
    c.inertia = get_num(j, "inertia", path, c.inertia);
    c.cognitive = get_num(j, "cognitive", path, c.cognitive);
    c.social = get_num(j, "social", path, c.social);
    c.spread = get_positive(j, "spread", path, c.spread);
    c.max_iters = get_count(j, "max_iters", path, c.max_iters);
    c.f_tol = get_num(j, "f_tol", path, c.f_tol);
    out = c;
  } else {
    allow_keys(j, path, {"method", "population", "F", "CR", "spread", "max_iters", "f_tol"});
    opt::DifferentialEvolution c;
    c.population = get_count(j, "population", path, c.population);
    c.F = get_positive(j, "F", path, c.F);
    c.CR = get_num(j, "CR", path, c.CR);
    c.spread = get_positive(j, "spread", path, c.spread);
    c.max_iters = get_count(j, "max_iters", path, c.max_iters);
    c.f_tol = get_num(j, "f_tol", path, c.f_tol);
    out = c;
  }
  try {
    validate(out);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

PdeProblem parse_problem(const json& j, const RegisterLayout& layout, const std::string& path) {
  require_object(j, path);
  const std::string type = get_str(j, "type", path, "");
  PdeProblem out;
  if (type == "navier_stokes") {
    allow_keys(j, path, {"type", "nu", "rho", "h", "dims", "pressure"});
    pde::NavierStokes p;
    p.nu = get_num(j, "nu", path, p.nu);
    p.rho = get_num(j, "rho", path, p.rho);
    p.h = get_num(j, "h", path, p.h);
    p.dims = get_count(j, "dims", path, p.dims);
    if (j.contains("pressure")) {
      const std::string pp = path + ".pressure";
      const json& pr = j.at("pressure");
      const std::string kind = get_str(pr, "kind", pp, "");
      if (kind == "none") {
        allow_keys(pr, pp, {"kind"});
      } else if (kind == "uniform") {
        allow_keys(pr, pp, {"kind", "value"});
        p.pressure = pde::UniformGradient{get_num(pr, "value", pp, 0.0)};
      } else if (kind == "field") {
        allow_keys(pr, pp, {"kind", "samples"});
        if (!pr.contains("samples")) throw ConfigError(pp + ".samples", "required");
        p.pressure = pde::PressureField{parse_samples(pr.at("samples"), pp + ".samples", layout.dim())};
      } else {
        throw ConfigError(pp + ".kind", "expected none, uniform or field");
      }
    }
    out = p;
  } else if (type == "einstein") {
    allow_keys(j, path, {"type", "tensor", "G", "c", "j", "m", "axis_i", "axis_n"});
    pde::Einstein p;
    if (j.contains("tensor")) p.tensor = parse_tensor(j.at("tensor"), path + ".tensor");
    p.G = get_num(j, "G", path, p.G);
    p.c = get_num(j, "c", path, p.c);
    p.j = static_cast<int>(get_count(j, "j", path, 1, 0));
    p.m = static_cast<int>(get_count(j, "m", path, 1, 0));
    p.axis_i = get_str(j, "axis_i", path, "");
    p.axis_n = get_str(j, "axis_n", path, "");
    out = p;
  } else if (type == "maxwell") {
    allow_keys(j, path, {"type", "component", "update", "mu0", "eps0"});
    pde::Maxwell p;
    p.component = get_str(j, "component", path, p.component);
    const std::string w = get_str(j, "update", path, "B");
    if (w == "B") {
      p.which = pde::MaxwellUpdate::B;
    } else if (w == "E") {
      p.which = pde::MaxwellUpdate::E;
    } else {
      throw ConfigError(path + ".update", "expected \"B\" or \"E\"");
    }
    p.mu0 = get_num(j, "mu0", path, p.mu0);
    p.eps0 = get_num(j, "eps0", path, p.eps0);
    out = p;
  } else if (type == "boussinesq") {
    allow_keys(j, path, {"type", "alpha", "beta"});
    pde::Boussinesq p;
    p.alpha = get_num(j, "alpha", path, p.alpha);
    p.beta = get_num(j, "beta", path, p.beta);
    out = p;
  } else if (type == "camassa_holm") {
    allow_keys(j, path, {"type", "kappa"});
    pde::CamassaHolm p;
    p.kappa = get_num(j, "kappa", path, p.kappa);
    out = p;
  } else if (type == "lin_tsien") {
    allow_keys(j, path, {"type"});
    out = pde::LinTsien{};
  } else if (type == "dsw") {
    allow_keys(j, path, {"type"});
    out = pde::DSW{};
  } else if (type == "hunter_saxton") {
    allow_keys(j, path, {"type"});
    out = pde::HunterSaxton{};
  } else {
    throw ConfigError(path + ".type",
                      "expected navier_stokes, einstein, maxwell, boussinesq, lin_tsien, "
                      "camassa_holm, dsw or hunter_saxton");
  }
  try {
    validate(out, layout);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

ReferenceSolution parse_reference(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string kind = get_str(j, "kind", path, "");
  ReferenceSolution out;
  if (kind == "ns_exponential") {
    allow_keys(j, path, {"kind", "field", "A", "B", "c", "nu", "alpha", "beta", "component"});
    ref::NsExponential r;
    r.A = get_num(j, "A", path, r.A);
    r.B = get_num(j, "B", path, r.B);
    r.c = get_num(j, "c", path, r.c);
    r.nu = get_num(j, "nu", path, r.nu);
    r.alpha = get_num(j, "alpha", path, r.alpha);
    r.beta = get_num(j, "beta", path, r.beta);
    r.component = static_cast<int>(get_count(j, "component", path, 0, 0));
    if (r.component > 1) throw ConfigError(path + ".component", "expected 0 or 1");
    out = r;
  } else if (kind == "couette_steady") {
    allow_keys(j, path, {"kind", "field", "U", "H"});
    out = ref::CouetteSteady{get_num(j, "U", path, 1.0), get_num(j, "H", path, 1.0)};
  } else if (kind == "sech" || kind == "tanh") {
    allow_keys(j, path, {"kind", "field", "amplitude", "width", "center"});
    out = ref::SechTanh{get_num(j, "amplitude", path, 1.0), get_num(j, "width", path, 1.0),
                        get_num(j, "center", path, 0.0), kind == "tanh"};
  } else if (kind == "sinusoid") {
    allow_keys(j, path, {"kind", "field", "amplitude", "wavenumber", "phase", "decay"});
    out = ref::Sinusoid{get_num(j, "amplitude", path, 1.0), get_num(j, "wavenumber", path, 1.0),
                        get_num(j, "phase", path, 0.0), get_num(j, "decay", path, 0.0)};
  } else if (kind == "linear_negative_slope") {
    allow_keys(j, path, {"kind", "field", "slope", "intercept"});
    out = ref::LinearNegativeSlope{get_num(j, "slope", path, -1.0),
                                   get_num(j, "intercept", path, 0.0)};
  } else {
    throw ConfigError(path + ".kind",
                      "expected ns_exponential, couette_steady, sech, tanh, sinusoid or "
                      "linear_negative_slope");
  }
  return out;
}

ExperimentConfig parse_config(const json& j) {
  allow_keys(j, "config",
             {"problem", "grid", "initial", "ansatz", "ansatz_sweep", "evolution", "optimizer",
              "optimizer_sweep", "tau_sweep", "fit_optimizer", "fit_restarts", "seed", "output",
              "references"});
  ExperimentConfig cfg;
  cfg.raw = j;
  if (!j.contains("grid")) throw ConfigError("grid", "required");
  cfg.layout = parse_grid(j.at("grid"));
  if (!j.contains("problem")) throw ConfigError("problem", "required");
  cfg.problem = parse_problem(j.at("problem"), cfg.layout);

  // initial conditions
  if (!j.contains("initial")) throw ConfigError("initial", "required");
  allow_keys(j.at("initial"), "initial", {"fields"});
  if (!j.at("initial").contains("fields")) throw ConfigError("initial.fields", "required");
  const json& fields = j.at("initial").at("fields");
  require_object(fields, "initial.fields");
  const auto known = state_fields(cfg.problem);
  for (const auto& [name, spec] : fields.items()) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("initial.fields." + name, "not a field of " + pde_name(cfg.problem));
    }
    cfg.initial[name] = parse_initial_field(spec, "initial.fields." + name, cfg.layout);
  }
  for (const auto& f : evolved_fields(cfg.problem)) {
    if (!cfg.initial.count(f)) throw ConfigError("initial.fields." + f, "required");
  }
  for (const auto& f : known) {
    if (!cfg.initial.count(f)) cfg.initial[f] = std::vector<double>(cfg.layout.dim(), 0.0);
  }

  const std::size_t nq = cfg.layout.total_qubits();
  cfg.ansatz = parse_list_or_one<AnsatzSpec>(
      j, "ansatz", "ansatz_sweep",
      [nq](const json& a, const std::string& p) { return parse_ansatz(a, p, nq); },
      std::nullopt);
  cfg.optimizers = parse_list_or_one<OptimizerConfig>(
      j, "optimizer", "optimizer_sweep",
      [](const json& a, const std::string& p) { return parse_optimizer(a, p); },
      OptimizerConfig{opt::GradientDescent{}});

  if (!j.contains("evolution")) throw ConfigError("evolution", "required");
  const json& ev = j.at("evolution");
  allow_keys(ev, "evolution", {"tau", "steps", "restarts", "mode", "shots"});
  cfg.evolution.tau = get_positive(ev, "tau", "evolution", 0.01);
  cfg.evolution.n_steps = get_count(ev, "steps", "evolution", 1);
  cfg.evolution.restarts = get_count(ev, "restarts", "evolution", 1);
  const std::string mode = get_str(ev, "mode", "evolution", "exact");
  if (mode == "shots") {
    cfg.evolution.shots = ShotMode{get_count(ev, "shots", "evolution", 100000), 0};
  } else if (mode != "exact") {
    throw ConfigError("evolution.mode", "expected exact or shots");
  } else if (ev.contains("shots")) {
    throw ConfigError("evolution.shots", "only valid with mode \"shots\"");
  }
  if (j.contains("tau_sweep")) {
    if (ev.contains("tau")) throw ConfigError("tau_sweep", "cannot be combined with evolution.tau");
    const json& l = j.at("tau_sweep");
    if (!l.is_array() || l.empty()) throw ConfigError("tau_sweep", "expected a non-empty list");
    for (std::size_t i = 0; i < l.size(); ++i) {
      const std::string p = "tau_sweep[" + std::to_string(i) + "]";
      if (!l[i].is_number() || !(l[i].get<double>() > 0) || !std::isfinite(l[i].get<double>())) {
        throw ConfigError(p, "must be > 0");
      }
      cfg.taus.push_back(l[i].get<double>());
    }
  } else {
    cfg.taus = {cfg.evolution.tau};
  }

  if (j.contains("fit_optimizer")) cfg.fit_optimizer = parse_optimizer(j.at("fit_optimizer"), "fit_optimizer");
  cfg.fit_restarts = get_count(j, "fit_restarts", "config", cfg.fit_restarts);
  cfg.seed = get_seed(j, "seed", "config", 0);
  cfg.evolution.seed = cfg.seed;
  cfg.output = get_str(j, "output", "config", cfg.output);
  if (cfg.output.empty()) throw ConfigError("output", "must not be empty");

  if (j.contains("references")) {
    require_object(j.at("references"), "references");
    for (const auto& [name, r] : j.at("references").items()) {
      const std::string p = "references." + name;
      NamedReference nr;
      nr.solution = parse_reference(r, p);
      nr.field = get_str(r, "field", p, evolved_fields(cfg.problem).front());
      if (std::find(known.begin(), known.end(), nr.field) == known.end()) {
        throw ConfigError(p + ".field", "not a field of " + pde_name(cfg.problem));
      }
      try {
        exact_field(nr.solution, cfg.layout, 0.0);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(p, e.what());
      }
      cfg.references[name] = nr;
    }
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

void write_trajectory_csv(std::ostream& out, const RegisterLayout& layout,
                          const std::vector<double>& times, const std::vector<FieldSet>& fields,
                          const std::vector<double>& costs,
                          const std::vector<double>& grad_norms) {
  out << "step,t,field,index";
  for (const auto& a : layout.axes()) out << ',' << a.label;
  out << ",value,cost,grad_norm\n";
  std::vector<std::vector<double>> pos(layout.dim());
  for (std::size_t k = 0; k < layout.dim(); ++k) pos[k] = layout.position(k);
  for (std::size_t s = 0; s < fields.size(); ++s) {
    const std::string head = std::to_string(s) + ',' + fmt(times[s]) + ',';
    const std::string tail = ',' + fmt(costs[s]) + ',' + fmt(grad_norms[s]) + '\n';
    for (const auto& [name, values] : fields[s]) {
      for (std::size_t k = 0; k < values.size(); ++k) {
        out << head << name << ',' << k;
        for (double x : pos[k]) out << ',' << fmt(x);
        out << ',' << fmt(values[k]) << tail;
      }
    }
  }
}

void write_errors_csv(std::ostream& out, const std::vector<double>& times,
                      const std::map<std::string, ErrorMetrics>& metrics) {
  out << "step,t,field,rel_l2,linf,guarded\n";
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (const auto& [name, m] : metrics) {
      if (s >= m.rel_l2.size()) continue;
      out << s << ',' << fmt(times[s]) << ',' << name << ',' << fmt(m.rel_l2[s]) << ','
          << fmt(m.linf[s]) << ',' << (m.guarded[s] ? 1 : 0) << '\n';
    }
  }
}

LoadedTrajectory read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) header.push_back(c);
  }
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_step = col("step"), c_t = col("t"), c_field = col("field"),
                    c_index = col("index"), c_value = col("value");
  LoadedTrajectory out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (cells.size() != header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    const std::size_t s = std::stoul(cells[c_step]);
    const std::size_t idx = std::stoul(cells[c_index]);
    if (s >= out.times.size()) {
      out.times.resize(s + 1, 0.0);
      out.fields.resize(s + 1);
    }
    out.times[s] = std::stod(cells[c_t]);
    auto& v = out.fields[s][cells[c_field]];
    if (idx >= v.size()) v.resize(idx + 1, 0.0);
    v[idx] = std::stod(cells[c_value]);
  }
  return out;
}

std::size_t workers_from_env() {
  const char* v = std::getenv("VQPDE_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) return 1;
  return static_cast<std::size_t>(n);
}

namespace {

struct MemberResult {
  json entry;
  bool ok = true;
};

std::string member_file(const std::string& stem, std::size_t k, bool sweep) {
  return sweep ? stem + "_" + std::to_string(k) + ".csv" : stem + ".csv";
}

FieldSet only(const FieldSet& f, const std::vector<std::string>& names) {
  FieldSet out;
  for (const auto& n : names) {
    auto it = f.find(n);
    if (it != f.end()) out[n] = it->second;
  }
  return out;
}

std::map<std::string, ErrorMetrics> field_errors(const std::vector<FieldSet>& approx,
                                                 const std::vector<FieldSet>& reference,
                                                 const std::vector<std::string>& names) {
  std::map<std::string, ErrorMetrics> out;
  const std::size_t n = std::min(approx.size(), reference.size());
  for (const auto& f : names) {
    std::vector<std::vector<double>> a, r;
    for (std::size_t s = 0; s < n; ++s) {
      auto ia = approx[s].find(f);
      auto ir = reference[s].find(f);
      if (ia == approx[s].end() || ir == reference[s].end()) {
        throw std::runtime_error("field '" + f + "' missing at step " + std::to_string(s));
      }
      a.push_back(ia->second);
      r.push_back(ir->second);
    }
    out[f] = l2_error(a, r);
  }
  return out;
}

MemberResult run_member(const ExperimentConfig& cfg, std::size_t k, const AnsatzSpec& spec,
                        const OptimizerConfig& optimizer, double tau, std::size_t opt_workers,
                        std::ostream& log, std::mutex& log_mu) {
  MemberResult res;
  const bool sweep = cfg.is_sweep();
  const fs::path dir = cfg.output;
  const auto names = evolved_fields(cfg.problem);
  EvolutionConfig ev = cfg.evolution;
  ev.tau = tau;
  ev.optimizer = optimizer;
  ev.workers = opt_workers;

  res.entry["index"] = k;
  res.entry["ansatz"] = spec.label();
  res.entry["optimizer"] = optimizer_name(optimizer);
  res.entry["tau"] = tau;

  Trajectory traj;
  try {
    traj = run(cfg.problem, cfg.initial, {{"*", spec}}, ev, cfg.layout, cfg.fit_optimizer,
               cfg.fit_restarts);
  } catch (const std::exception& e) {
    traj.error = e.what();
  }

  std::vector<double> times, costs, grads;
  std::vector<FieldSet> fields;
  std::size_t evals = 0;
  for (const auto& p : traj.points) {
    times.push_back(p.t);
    costs.push_back(p.cost);
    grads.push_back(p.grad_norm);
    fields.push_back(only(p.fields, names));
    evals += p.evaluations;
  }
  const std::string tfile = member_file("trajectory", k, sweep);
  {
    std::ofstream out(dir / tfile);
    write_trajectory_csv(out, cfg.layout, times, fields, costs, grads);
  }
  res.entry["files"]["trajectory"] = tfile;
  res.entry["steps_completed"] = traj.points.empty() ? 0 : traj.points.size() - 1;
  res.entry["evaluations"] = evals;
  res.entry["initial_overlap"] = traj.initial_overlap;
  res.entry["final_cost"] = costs.empty() ? 0.0 : costs.back();
  res.entry["warnings"] = traj.warnings;

  if (!traj.points.empty()) {
    try {
      const ClassicalTrajectory ref = run_classical(cfg.problem, traj.points.front().fields,
                                                    cfg.layout, tau, cfg.evolution.n_steps);
      std::vector<FieldSet> rf;
      for (const auto& f : ref.fields) rf.push_back(only(f, names));
      const std::string ofile = member_file("oracle", k, sweep);
      {
        std::ofstream out(dir / ofile);
        write_trajectory_csv(out, cfg.layout, ref.times, rf,
                             std::vector<double>(ref.times.size(), 0.0),
                             std::vector<double>(ref.times.size(), 0.0));
      }
      const auto metrics = field_errors(fields, rf, names);
      const std::string efile = member_file("errors", k, sweep);
      {
        std::ofstream out(dir / efile);
        write_errors_csv(out, times, metrics);
      }
      res.entry["files"]["oracle"] = ofile;
      res.entry["files"]["errors"] = efile;
      double fin = 0.0, worst = 0.0;
      for (const auto& [_, m] : metrics) {
        fin = std::max(fin, m.rel_l2.back());
        worst = std::max(worst, *std::max_element(m.rel_l2.begin(), m.rel_l2.end()));
      }
      res.entry["final_rel_l2"] = fin;
      res.entry["max_rel_l2"] = worst;
    } catch (const std::exception& e) {
      if (!traj.error) traj.error = std::string("oracle: ") + e.what();
    }
  }

  std::lock_guard<std::mutex> lock(log_mu);
  for (const auto& w : traj.warnings) log << "run " << k << ": warning: " << w << '\n';
  if (traj.error) {
    res.ok = false;
    res.entry["status"] = "failed";
    res.entry["error"] = *traj.error;
    log << "run " << k << " (" << spec.label() << ", " << optimizer_name(optimizer)
        << ", tau=" << tau << ") failed: " << *traj.error << '\n';
  } else {
    res.entry["status"] = "ok";
    log << "run " << k << " (" << spec.label() << ", " << optimizer_name(optimizer)
        << ", tau=" << tau << ") ok: final cost " << fmt(costs.back());
    if (res.entry.contains("final_rel_l2")) {
      log << ", final rel L2 vs oracle " << fmt(res.entry["final_rel_l2"].get<double>());
    }
    log << '\n';
  }
  return res;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log, std::size_t workers) {
  fs::create_directories(cfg.output);
  json manifest;
  manifest["version"] = kVersion;
  manifest["config_hash"] = fnv1a_hex(cfg.raw.dump());
  manifest["seed"] = cfg.seed;
  manifest["started"] = utc_now();
  manifest["config"] = cfg.raw;

  struct Member {
    const AnsatzSpec* spec;
    const OptimizerConfig* opt;
    double tau;
  };
  std::vector<Member> members;
  for (const auto& a : cfg.ansatz) {
    for (const auto& o : cfg.optimizers) {
      for (double t : cfg.taus) members.push_back({&a, &o, t});
    }
  }
  workers = std::max<std::size_t>(1, workers);
  const std::size_t outer = std::min(workers, members.size());
  const std::size_t inner = members.size() == 1 ? workers : 1;

  std::vector<MemberResult> results(members.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < members.size(); k = next++) {
      results[k] = run_member(cfg, k, *members[k].spec, *members[k].opt, members[k].tau, inner,
                              log, log_mu);
    }
  };
  if (outer <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < outer; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  bool ok = true;
  manifest["runs"] = json::array();
  for (const auto& r : results) {
    ok = ok && r.ok;
    manifest["runs"].push_back(r.entry);
  }
  if (cfg.is_sweep()) {
    std::ofstream out(fs::path(cfg.output) / "summary.csv");
    out << "run,ansatz,optimizer,tau,status,steps_completed,final_cost,final_rel_l2,max_rel_l2,"
           "evaluations\n";
    for (const auto& r : results) {
      const json& e = r.entry;
      out << e["index"].get<std::size_t>() << ',' << e["ansatz"].get<std::string>() << ','
          << e["optimizer"].get<std::string>() << ',' << fmt(e["tau"].get<double>()) << ','
          << e["status"].get<std::string>() << ',' << e["steps_completed"].get<std::size_t>()
          << ',' << fmt(e["final_cost"].get<double>()) << ','
          << (e.contains("final_rel_l2") ? fmt(e["final_rel_l2"].get<double>()) : "") << ','
          << (e.contains("max_rel_l2") ? fmt(e["max_rel_l2"].get<double>()) : "") << ','
          << e["evaluations"].get<std::size_t>() << '\n';
    }
    manifest["summary"] = "summary.csv";
  }
  manifest["finished"] = utc_now();
  std::ofstream(fs::path(cfg.output) / "manifest.json") << manifest.dump(2) << '\n';
  return ok ? 0 : 1;
}

void compare_run(const fs::path& dir, const std::string& against, std::ostream& log) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw std::runtime_error("no manifest.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed manifest: " + std::string(e.what()));
  }
  const ExperimentConfig cfg = parse_config(manifest.at("config"));
  const auto names = evolved_fields(cfg.problem);

  std::string tag;
  const NamedReference* exact = nullptr;
  if (against == "oracle") {
    tag = "oracle";
  } else if (against.rfind("exact:", 0) == 0) {
    const std::string name = against.substr(6);
    auto it = cfg.references.find(name);
    if (it == cfg.references.end()) {
      throw std::invalid_argument("no reference named '" + name + "' in the run config");
    }
    exact = &it->second;
    tag = "exact_" + name;
  } else {
    throw std::invalid_argument("--against must be oracle or exact:<name>");
  }

  const bool sweep = manifest.at("runs").size() > 1;
  for (const auto& e : manifest.at("runs")) {
    const std::size_t k = e.at("index").get<std::size_t>();
    const LoadedTrajectory traj = read_trajectory_csv(dir / e.at("files").at("trajectory").get<std::string>());
    if (traj.fields.empty()) throw std::runtime_error("run " + std::to_string(k) + ": empty trajectory");
    for (const auto& fsnap : traj.fields) {
      for (const auto& [f, v] : fsnap) {
        if (v.size() != cfg.layout.dim()) {
          throw std::runtime_error("run " + std::to_string(k) + ": field '" + f +
                                   "' does not match the configured grid");
        }
      }
    }
    std::vector<FieldSet> ref;
    std::vector<std::string> fields = names;
    if (exact) {
      fields = {exact->field};
      for (double t : traj.times) ref.push_back({{exact->field, exact_field(exact->solution, cfg.layout, t)}});
    } else {
      FieldSet init = cfg.initial;
      for (const auto& [f, v] : traj.fields.front()) init[f] = v;
      const auto cl = run_classical(cfg.problem, init, cfg.layout, e.at("tau").get<double>(),
                                    traj.times.size() - 1);
      ref = cl.fields;
    }
    const auto metrics = field_errors(traj.fields, ref, fields);
    const std::string file = sweep ? "compare_" + tag + "_" + std::to_string(k) + ".csv"
                                   : "compare_" + tag + ".csv";
    {
      std::ofstream out(dir / file);
      write_errors_csv(out, traj.times, metrics);
    }
    for (const auto& [f, m] : metrics) {
      log << "run " << k << " field " << f << " vs " << against << ": final rel L2 "
          << fmt(m.rel_l2.back()) << ", final Linf " << fmt(m.linf.back()) << ", max rel L2 "
          << fmt(*std::max_element(m.rel_l2.begin(), m.rel_l2.end()))
          << (std::find(m.guarded.begin(), m.guarded.end(), true) != m.guarded.end()
                  ? " (reference norm below 1e-12 at some steps)"
                  : "")
          << " -> " << file << '\n';
    }
  }
}

}  // namespace vqpde
