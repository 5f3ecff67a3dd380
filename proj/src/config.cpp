#include "romkit/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "romkit/errors.hpp"

namespace romkit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

PrimState parse_prim(const json& j, const std::string& path,
                     const PrimState& dflt) {
  require_object(j, path);
  reject_unknown(j, path, {"rho", "u", "p"});
  PrimState s = dflt;
  if (const json* v = find(j, "rho")) s.rho = as_number(*v, path + ".rho");
  if (const json* v = find(j, "u")) s.u = as_number(*v, path + ".u");
  if (const json* v = find(j, "p")) s.p = as_number(*v, path + ".p");
  if (s.rho <= 0.0) fail(path + ".rho", "must be positive");
  if (s.p <= 0.0) fail(path + ".p", "must be positive");
  return s;
}

ProblemConfig parse_problem(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"type", "n_cells", "gamma", "x_min", "x_max", "split_x",
                  "left", "right", "entropy_fix", "entropy_fix_delta", "n",
                  "dx", "matrix_path"});
  ProblemConfig p;
  std::string type = "sod";
  if (const json* v = find(j, "type")) type = as_string(*v, path + ".type");
  if (type == "sod") {
    p.kind = ProblemConfig::Kind::Sod;
  } else if (type == "lti-diffusion") {
    p.kind = ProblemConfig::Kind::LtiDiffusion;
  } else if (type == "lti-file") {
    p.kind = ProblemConfig::Kind::LtiFile;
  } else {
    fail(path + ".type", "must be sod, lti-diffusion, or lti-file");
  }

  if (const json* v = find(j, "n_cells")) {
    const long long n = as_integer(*v, path + ".n_cells");
    if (n < 2) fail(path + ".n_cells", "must be at least 2");
    p.sod.n_cells = static_cast<int>(n);
  }
  if (const json* v = find(j, "gamma")) {
    p.sod.gamma = as_number(*v, path + ".gamma");
    if (p.sod.gamma <= 1.0) fail(path + ".gamma", "must exceed 1");
  }
  if (const json* v = find(j, "x_min")) p.sod.x_min = as_number(*v, path + ".x_min");
  if (const json* v = find(j, "x_max")) p.sod.x_max = as_number(*v, path + ".x_max");
  if (p.sod.x_max <= p.sod.x_min) fail(path + ".x_max", "must exceed x_min");
  if (const json* v = find(j, "split_x")) {
    p.sod.split_x = as_number(*v, path + ".split_x");
    if (p.sod.split_x <= p.sod.x_min || p.sod.split_x >= p.sod.x_max) {
      fail(path + ".split_x", "must lie inside the domain");
    }
  }
  if (const json* v = find(j, "left")) p.sod.left = parse_prim(*v, path + ".left", p.sod.left);
  if (const json* v = find(j, "right")) p.sod.right = parse_prim(*v, path + ".right", p.sod.right);
  if (const json* v = find(j, "entropy_fix")) {
    p.sod.entropy_fix = as_bool(*v, path + ".entropy_fix");
  }
  if (const json* v = find(j, "entropy_fix_delta")) {
    p.sod.entropy_fix_delta = as_number(*v, path + ".entropy_fix_delta");
    if (p.sod.entropy_fix_delta < 0.0) fail(path + ".entropy_fix_delta", "must be >= 0");
  }
  if (const json* v = find(j, "n")) {
    const long long n = as_integer(*v, path + ".n");
    if (n < 2) fail(path + ".n", "must be at least 2");
    p.lti_n = static_cast<int>(n);
  }
  if (const json* v = find(j, "dx")) {
    p.lti_dx = as_number(*v, path + ".dx");
    if (p.lti_dx <= 0.0) fail(path + ".dx", "must be positive");
  }
  if (const json* v = find(j, "matrix_path")) {
    p.matrix_path = as_string(*v, path + ".matrix_path");
    if (p.matrix_path.empty()) fail(path + ".matrix_path", "must not be empty");
  }
  if (p.kind == ProblemConfig::Kind::LtiFile && p.matrix_path.empty()) {
    fail(path + ".matrix_path", "required for lti-file problems");
  }
  return p;
}

void parse_integrator_fields(const json& j, const std::string& path,
                             IntegratorSpec& spec) {
  if (const json* v = find(j, "scheme")) {
    spec.scheme = scheme_from_name(as_string(*v, path + ".scheme"));
  }
  if (const json* v = find(j, "dt")) {
    spec.dt = as_number(*v, path + ".dt");
    if (spec.dt <= 0.0) fail(path + ".dt", "must be positive");
  }
  if (const json* v = find(j, "t_final")) {
    spec.t_final = as_number(*v, path + ".t_final");
    if (spec.t_final < 0.0) fail(path + ".t_final", "must be >= 0");
  }
  if (const json* v = find(j, "newton_tol")) {
    spec.newton_tol = as_number(*v, path + ".newton_tol");
    if (spec.newton_tol <= 0.0) fail(path + ".newton_tol", "must be positive");
  }
  if (const json* v = find(j, "newton_max_iter")) {
    const long long n = as_integer(*v, path + ".newton_max_iter");
    if (n < 1) fail(path + ".newton_max_iter", "must be at least 1");
    spec.newton_max_iter = static_cast<int>(n);
  }
  if (const json* v = find(j, "linear_solver")) {
    const std::string s = as_string(*v, path + ".linear_solver");
    if (s == "direct") {
      spec.linear_solver = LinearSolver::DirectGauss;
    } else if (s == "jfnk") {
      spec.linear_solver = LinearSolver::JfnkGmres;
    } else {
      fail(path + ".linear_solver", "must be direct or jfnk");
    }
  }
  if (const json* v = find(j, "gmres_tol")) {
    spec.gmres_tol = as_number(*v, path + ".gmres_tol");
    if (spec.gmres_tol <= 0.0) fail(path + ".gmres_tol", "must be positive");
  }
  if (const json* v = find(j, "gmres_max_iter")) {
    const long long n = as_integer(*v, path + ".gmres_max_iter");
    if (n < 0) fail(path + ".gmres_max_iter", "must be >= 0");
    spec.gmres_max_iter = static_cast<int>(n);
  }
}

IntegratorSpec parse_fom(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"scheme", "dt", "t_final", "newton_tol", "newton_max_iter",
                  "linear_solver", "gmres_tol", "gmres_max_iter"});
  IntegratorSpec spec;
  spec.scheme = Scheme::SspRk3;
  spec.dt = 5e-4;
  spec.t_final = 1.0;
  parse_integrator_fields(j, path, spec);
  return spec;
}

PodConfig parse_pod(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"mode", "k", "k_per_variable", "energy"});
  PodConfig p;
  std::string mode = "per-variable";
  if (const json* v = find(j, "mode")) mode = as_string(*v, path + ".mode");
  if (mode == "per-variable") {
    p.per_variable = true;
  } else if (mode == "global") {
    p.per_variable = false;
  } else {
    fail(path + ".mode", "must be per-variable or global");
  }
  if (const json* v = find(j, "k")) {
    const long long k = as_integer(*v, path + ".k");
    if (k < 1) fail(path + ".k", "must be at least 1");
    p.k = static_cast<int>(k);
  }
  if (const json* v = find(j, "k_per_variable")) {
    const long long k = as_integer(*v, path + ".k_per_variable");
    if (k < 1) fail(path + ".k_per_variable", "must be at least 1");
    p.k_per_var = static_cast<int>(k);
  }
  if (const json* v = find(j, "energy")) {
    p.energy = as_number(*v, path + ".energy");
    if (p.energy <= 0.0 || p.energy > 1.0) fail(path + ".energy", "must lie in (0, 1]");
  }
  const bool has_count = p.per_variable ? p.k_per_var > 0 : p.k > 0;
  const bool has_energy = p.energy > 0.0;
  if (has_count == has_energy) {
    fail(path, p.per_variable
                   ? "set exactly one of k_per_variable or energy"
                   : "set exactly one of k or energy");
  }
  if (p.per_variable && p.k > 0) {
    fail(path + ".k", "use k_per_variable in per-variable mode");
  }
  if (!p.per_variable && p.k_per_var > 0) {
    fail(path + ".k_per_variable", "use k in global mode");
  }
  return p;
}

RomConfig parse_rom(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"method", "tau", "tau_auto", "tau_c", "jac_mode", "fd_eps",
                  "jfnk_eps", "k", "scheme", "dt", "t_final", "newton_tol",
                  "newton_max_iter", "linear_solver", "gmres_tol",
                  "gmres_max_iter"});
  RomConfig r;
  r.ispec.scheme = Scheme::ImplicitEuler;
  r.ispec.dt = 1e-3;
  r.ispec.t_final = 0.0;  // 0 means: use the snapshot horizon
  parse_integrator_fields(j, path, r.ispec);

  std::string method = "galerkin";
  if (const json* v = find(j, "method")) method = as_string(*v, path + ".method");
  double tau = 0.0;
  bool tau_auto = false;
  double tau_c = 0.2;
  if (const json* v = find(j, "tau")) {
    tau = as_number(*v, path + ".tau");
    if (tau < 0.0) fail(path + ".tau", "must be >= 0");
  }
  if (const json* v = find(j, "tau_auto")) tau_auto = as_bool(*v, path + ".tau_auto");
  if (const json* v = find(j, "tau_c")) {
    tau_c = as_number(*v, path + ".tau_c");
    if (tau_c <= 0.0) fail(path + ".tau_c", "must be positive");
  }
  JacMode jac = JacMode::FiniteDiff;
  if (const json* v = find(j, "jac_mode")) {
    const std::string s = as_string(*v, path + ".jac_mode");
    if (s == "fd") {
      jac = JacMode::FiniteDiff;
    } else if (s == "exact") {
      jac = JacMode::Exact;
    } else {
      fail(path + ".jac_mode", "must be fd or exact");
    }
  }
  if (method == "galerkin") {
    r.method = RomMethod::galerkin();
  } else if (method == "apg") {
    r.method = tau_auto ? RomMethod::apg_auto(tau_c, jac)
                        : RomMethod::apg(tau, jac);
  } else if (method == "lspg") {
    r.method = RomMethod::lspg();
    if (!is_implicit(r.ispec.scheme)) {
      fail(path + ".scheme", "lspg requires an implicit scheme");
    }
  } else {
    fail(path + ".method", "must be galerkin, apg, or lspg");
  }
  r.method.jac_mode = jac;
  if (const json* v = find(j, "fd_eps")) {
    r.method.fd_eps = as_number(*v, path + ".fd_eps");
    if (r.method.fd_eps <= 0.0) fail(path + ".fd_eps", "must be positive");
  }
  if (const json* v = find(j, "jfnk_eps")) {
    r.method.jfnk_eps = as_number(*v, path + ".jfnk_eps");
    if (r.method.jfnk_eps <= 0.0) fail(path + ".jfnk_eps", "must be positive");
  }
  if (const json* v = find(j, "k")) {
    const long long k = as_integer(*v, path + ".k");
    if (k < 1) fail(path + ".k", "must be at least 1");
    r.k = static_cast<int>(k);
  }
  return r;
}

HyperConfig parse_hyper(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"r", "target_np"});
  HyperConfig h;
  h.enabled = true;
  if (const json* v = find(j, "r")) {
    const long long r = as_integer(*v, path + ".r");
    if (r < 1) fail(path + ".r", "must be at least 1");
    h.r = static_cast<int>(r);
  } else {
    fail(path + ".r", "required");
  }
  if (const json* v = find(j, "target_np")) {
    const long long np = as_integer(*v, path + ".target_np");
    if (np < h.r) fail(path + ".target_np", "must be at least r");
    h.target_np = static_cast<int>(np);
  } else {
    h.target_np = h.r;
  }
  return h;
}

void parse_method_token(const std::string& token, const std::string& path) {
  std::string base = token;
  const auto slash = token.find('/');
  if (slash != std::string::npos) {
    base = token.substr(0, slash);
    scheme_from_name(token.substr(slash + 1));  // throws on a bad scheme
  }
  if (base != "galerkin" && base != "apg" && base != "lspg") {
    fail(path, "method must be galerkin, apg, or lspg (optionally /scheme)");
  }
}

SweepConfig parse_sweep(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"k", "tau", "dt", "methods"});
  SweepConfig s;
  if (const json* v = find(j, "k")) {
    if (!v->is_array()) fail(path + ".k", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const long long k = as_integer((*v)[i], path + ".k[" + std::to_string(i) + "]");
      if (k < 1) fail(path + ".k", "entries must be at least 1");
      s.k.push_back(static_cast<int>(k));
    }
  }
  if (const json* v = find(j, "tau")) {
    if (!v->is_array()) fail(path + ".tau", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const double t = as_number((*v)[i], path + ".tau[" + std::to_string(i) + "]");
      if (t < 0.0) fail(path + ".tau", "entries must be >= 0");
      s.tau.push_back(t);
    }
  }
  if (const json* v = find(j, "dt")) {
    if (!v->is_array()) fail(path + ".dt", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const double t = as_number((*v)[i], path + ".dt[" + std::to_string(i) + "]");
      if (t <= 0.0) fail(path + ".dt", "entries must be positive");
      s.dt.push_back(t);
    }
  }
  if (const json* v = find(j, "methods")) {
    if (!v->is_array()) fail(path + ".methods", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string token =
          as_string((*v)[i], path + ".methods[" + std::to_string(i) + "]");
      try {
        parse_method_token(token, path + ".methods[" + std::to_string(i) + "]");
      } catch (const InvalidArgument& e) {
        fail(path + ".methods[" + std::to_string(i) + "]", e.what());
      }
      s.methods.push_back(token);
    }
  }
  return s;
}

OutputConfig parse_outputs(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"dir", "save_every"});
  OutputConfig o;
  if (const json* v = find(j, "dir")) {
    o.dir = as_string(*v, path + ".dir");
    if (o.dir.empty()) fail(path + ".dir", "must not be empty");
  }
  if (const json* v = find(j, "save_every")) {
    const long long n = as_integer(*v, path + ".save_every");
    if (n < 1) fail(path + ".save_every", "must be at least 1");
    o.save_every = static_cast<int>(n);
  }
  return o;
}

VerifyConfig parse_verify(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"cases"});
  VerifyConfig v;
  if (const json* c = find(j, "cases")) {
    const long long n = as_integer(*c, path + ".cases");
    if (n < 1) fail(path + ".cases", "must be at least 1");
    v.cases = static_cast<int>(n);
  }
  return v;
}

CostConfig parse_cost(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"n", "omega", "k_max", "k_step"});
  CostConfig c;
  if (const json* v = find(j, "n")) {
    c.n = as_integer(*v, path + ".n");
    if (c.n < 1) fail(path + ".n", "must be at least 1");
  }
  if (const json* v = find(j, "omega")) {
    c.omega = as_integer(*v, path + ".omega");
    if (c.omega < 1) fail(path + ".omega", "must be at least 1");
  }
  if (const json* v = find(j, "k_max")) {
    c.k_max = as_integer(*v, path + ".k_max");
    if (c.k_max < 1) fail(path + ".k_max", "must be at least 1");
  }
  if (const json* v = find(j, "k_step")) {
    c.k_step = as_integer(*v, path + ".k_step");
    if (c.k_step < 1) fail(path + ".k_step", "must be at least 1");
  }
  return c;
}

}  // namespace

Scheme scheme_from_name(const std::string& name) {
  if (name == "explicit-euler") return Scheme::ExplicitEuler;
  if (name == "ssp-rk3") return Scheme::SspRk3;
  if (name == "implicit-euler") return Scheme::ImplicitEuler;
  if (name == "crank-nicolson") return Scheme::CrankNicolson;
  throw InvalidArgument(
      "scheme must be explicit-euler, ssp-rk3, implicit-euler, or crank-nicolson");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ExplicitEuler:
      return "explicit-euler";
    case Scheme::SspRk3:
      return "ssp-rk3";
    case Scheme::ImplicitEuler:
      return "implicit-euler";
    case Scheme::CrankNicolson:
      return "crank-nicolson";
  }
  throw InvalidArgument("unknown scheme");
}

std::string method_name(RomMethod::Kind kind) {
  switch (kind) {
    case RomMethod::Kind::Galerkin:
      return "galerkin";
    case RomMethod::Kind::Apg:
      return "apg";
    case RomMethod::Kind::Lspg:
      return "lspg";
  }
  throw InvalidArgument("unknown method");
}

RunConfig parse_config(const nlohmann::json& j) {
  require_object(j, "config");
  reject_unknown(j, "config",
                 {"problem", "fom", "pod", "rom", "hyper", "sweep", "outputs",
                  "verify", "cost", "seed"});
  RunConfig cfg;
  cfg.fom.scheme = Scheme::SspRk3;
  cfg.fom.dt = 5e-4;
  cfg.fom.t_final = 1.0;
  cfg.pod.per_variable = true;
  cfg.pod.k_per_var = 50;
  cfg.rom.ispec.scheme = Scheme::ImplicitEuler;
  cfg.rom.ispec.dt = 1e-3;
  cfg.rom.ispec.t_final = 0.0;

  if (const json* v = find(j, "problem")) cfg.problem = parse_problem(*v, "problem");
  if (const json* v = find(j, "fom")) cfg.fom = parse_fom(*v, "fom");
  if (const json* v = find(j, "pod")) cfg.pod = parse_pod(*v, "pod");
  if (const json* v = find(j, "rom")) cfg.rom = parse_rom(*v, "rom");
  if (const json* v = find(j, "hyper")) cfg.hyper = parse_hyper(*v, "hyper");
  if (const json* v = find(j, "sweep")) cfg.sweep = parse_sweep(*v, "sweep");
  if (const json* v = find(j, "outputs")) cfg.outputs = parse_outputs(*v, "outputs");
  if (const json* v = find(j, "verify")) cfg.verify = parse_verify(*v, "verify");
  if (const json* v = find(j, "cost")) cfg.cost = parse_cost(*v, "cost");
  if (const json* v = find(j, "seed")) {
    const long long s = as_integer(*v, "seed");
    if (s < 0) fail("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace romkit
