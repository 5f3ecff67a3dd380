#include "romkit/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "romkit/analysis.hpp"
#include "romkit/basis.hpp"
#include "romkit/config.hpp"
#include "romkit/errors.hpp"
#include "romkit/euler1d.hpp"
#include "romkit/hyper.hpp"
#include "romkit/io.hpp"
#include "romkit/lti.hpp"
#include "romkit/rng.hpp"
#include "romkit/rom.hpp"
#include "romkit/timeint.hpp"

namespace romkit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string num(double v) { return io::format_double(v); }
std::string num(long long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

RunConfig load_effective(const DriverOptions& opt, bool config_required) {
  RunConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = load_config(opt.config_path);
  } else if (config_required) {
    throw ConfigError("--config is required for this command");
  }
  if (!opt.out_dir.empty()) cfg.outputs.dir = opt.out_dir;
  if (opt.seed_set) cfg.seed = opt.seed;
  return cfg;
}

struct ProblemSetup {
  std::unique_ptr<FomSystem> sys;
  Eigen::VectorXd u0;
  int n_vars = 1;
  int n_cells = 0;
  std::string name;
};

ProblemSetup make_problem(const RunConfig& cfg) {
  ProblemSetup s;
  switch (cfg.problem.kind) {
    case ProblemConfig::Kind::Sod: {
      auto sys = std::make_unique<Euler1d>(cfg.problem.sod);
      s.u0 = sys->initial_condition();
      s.n_vars = 3;
      s.n_cells = cfg.problem.sod.n_cells;
      s.name = "sod";
      s.sys = std::move(sys);
      break;
    }
    case ProblemConfig::Kind::LtiDiffusion: {
      const int n = cfg.problem.lti_n;
      const double dx =
          cfg.problem.lti_dx > 0.0 ? cfg.problem.lti_dx : 1.0 / (n + 1);
      s.sys = std::make_unique<LtiSystem>(diffusion_matrix(n, dx));
      s.u0 = Rng(cfg.seed).normal_vector(n).normalized();
      s.n_vars = 1;
      s.n_cells = n;
      s.name = "lti-diffusion";
      break;
    }
    case ProblemConfig::Kind::LtiFile: {
      const Eigen::MatrixXd a = io::read_matrix(cfg.problem.matrix_path);
      if (a.rows() != a.cols()) {
        throw ConfigError("problem.matrix_path: matrix must be square, got " +
                          std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()));
      }
      s.sys = std::make_unique<LtiSystem>(a);
      s.u0 = Rng(cfg.seed).normal_vector(a.rows()).normalized();
      s.n_vars = 1;
      s.n_cells = static_cast<int>(a.rows());
      s.name = "lti-file";
      break;
    }
  }
  return s;
}

OdeSystem wrap_fom(const FomSystem& sys) {
  OdeSystem ode;
  ode.dim = sys.dim();
  ode.rhs = [&sys](const Eigen::VectorXd& u) { return sys.rhs(u); };
  if (sys.has_jac_dense()) {
    ode.jac = [&sys](const Eigen::VectorXd& u) { return sys.jac_dense(u); };
  }
  ode.jac_vec = [&sys](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return sys.jac_vec(u, v);
  };
  return ode;
}

std::string snapshots_path(const RunConfig& cfg) {
  return cfg.outputs.dir + "/fom_snapshots.romf";
}
std::string basis_path(const RunConfig& cfg) {
  return cfg.outputs.dir + "/basis.romf";
}

struct SnapshotSet {
  Eigen::MatrixXd states;
  std::vector<double> times;
  json meta;
};

SnapshotSet read_snapshots(const RunConfig& cfg) {
  SnapshotSet s;
  s.states = io::read_matrix(snapshots_path(cfg));
  s.meta = io::read_sidecar(snapshots_path(cfg));
  if (!s.meta.contains("times") || !s.meta["times"].is_array()) {
    throw MissingArtifact("snapshot sidecar lacks a times array");
  }
  s.times = s.meta["times"].get<std::vector<double>>();
  if (static_cast<Eigen::Index>(s.times.size()) != s.states.cols()) {
    throw MissingArtifact("snapshot sidecar times do not match the matrix");
  }
  return s;
}

TrialBasis read_basis(const RunConfig& cfg) {
  const Eigen::MatrixXd v = io::read_matrix(basis_path(cfg));
  const json meta = io::read_sidecar(basis_path(cfg));
  std::vector<BlockSpec> layout;
  if (meta.contains("blocks")) {
    for (const auto& b : meta["blocks"]) {
      layout.push_back(BlockSpec{b.at("row_begin").get<Eigen::Index>(),
                                 b.at("rows").get<Eigen::Index>(),
                                 b.at("col_begin").get<Eigen::Index>(),
                                 b.at("cols").get<Eigen::Index>()});
    }
  }
  Eigen::VectorXd sigma;
  if (meta.contains("singular_values")) {
    const auto vals = meta["singular_values"].get<std::vector<double>>();
    sigma = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
  }
  if (layout.empty()) return TrialBasis(v, sigma);
  return TrialBasis(v, layout, sigma);
}

// Leading columns of every block; K must split evenly across blocks.
TrialBasis truncate_basis(const TrialBasis& tb, int k) {
  if (k <= 0 || k == tb.k()) return tb;
  if (k > tb.k()) {
    throw ConfigError("rom.k: basis has only " + std::to_string(tb.k()) +
                      " columns, requested " + std::to_string(k));
  }
  const auto& layout = tb.block_layout();
  const int nb = static_cast<int>(layout.size());
  if (k % nb != 0) {
    throw ConfigError("rom.k: " + std::to_string(k) +
                      " does not split evenly across " + std::to_string(nb) +
                      " basis blocks");
  }
  const Eigen::Index kb = k / nb;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(tb.n(), k);
  Eigen::VectorXd sigma(k);
  std::vector<BlockSpec> out;
  Eigen::Index col = 0;
  for (const auto& b : layout) {
    if (kb > b.cols) {
      throw ConfigError("rom.k: block with " + std::to_string(b.cols) +
                        " columns cannot supply " + std::to_string(kb));
    }
    v.block(b.row_begin, col, b.rows, kb) =
        tb.dense().block(b.row_begin, b.col_begin, b.rows, kb);
    if (tb.singular_values().size() == tb.k()) {
      sigma.segment(col, kb) = tb.singular_values().segment(b.col_begin, kb);
    }
    out.push_back(BlockSpec{b.row_begin, b.rows, col, kb});
    col += kb;
  }
  if (tb.singular_values().size() != tb.k()) sigma.resize(0);
  return TrialBasis(std::move(v), std::move(out), std::move(sigma));
}

Trajectory as_trajectory(const Eigen::MatrixXd& states,
                         const std::vector<double>& times) {
  Trajectory t;
  t.states = states;
  t.times = times;
  return t;
}

// ROM save cadence reproducing the snapshot grid: the snapshot interval must
// be an integer multiple of the ROM step.
int cadence_every(const std::vector<double>& snap_times, double rom_dt) {
  if (snap_times.empty()) throw ConfigError("snapshot set is empty");
  const double snap_dt =
      snap_times.size() >= 2 ? snap_times[1] - snap_times[0] : snap_times[0];
  if (snap_dt <= 0.0) {
    throw ConfigError("rom.dt: snapshot grid has no positive interval");
  }
  const long long every = std::llround(snap_dt / rom_dt);
  if (every < 1 ||
      std::abs(double(every) * rom_dt - snap_dt) > 1e-9 * std::max(snap_dt, 1.0)) {
    throw ConfigError("rom.dt: " + num(rom_dt) +
                      " does not divide the snapshot interval " + num(snap_dt));
  }
  return static_cast<int>(every);
}

Algorithm classify(RomMethod::Kind kind, Scheme scheme, LinearSolver solver) {
  if (kind == RomMethod::Kind::Lspg) return Algorithm::Lspg;
  if (!is_implicit(scheme)) {
    return kind == RomMethod::Kind::Apg ? Algorithm::ApgExplicit
                                        : Algorithm::GalerkinExplicit;
  }
  if (kind == RomMethod::Kind::Apg) {
    return solver == LinearSolver::JfnkGmres ? Algorithm::ApgImplicitJfnk
                                             : Algorithm::ApgImplicitDirect;
  }
  return Algorithm::GalerkinImplicit;
}

std::string alg_name(Algorithm a) {
  switch (a) {
    case Algorithm::GalerkinExplicit:
      return "galerkin-explicit";
    case Algorithm::ApgExplicit:
      return "apg-explicit";
    case Algorithm::GalerkinImplicit:
      return "galerkin-implicit";
    case Algorithm::ApgImplicitDirect:
      return "apg-implicit-direct";
    case Algorithm::ApgImplicitJfnk:
      return "apg-implicit-jfnk";
    case Algorithm::Lspg:
      return "lspg";
  }
  return "unknown";
}

long long flops_for_run(const RunConfig& cfg, const FomSystem& sys, int k,
                        const RomMethod& method, const IntegratorSpec& ispec,
                        const Trajectory& traj, int np, int ns) {
  CostModel m;
  m.n = sys.dim();
  m.k = k;
  m.omega = cfg.cost.omega;
  m.r = np;
  m.np = np;
  (void)ns;
  const Algorithm alg = classify(method.kind, ispec.scheme, ispec.linear_solver);
  if (alg == Algorithm::ApgImplicitJfnk) {
    const long long newt = std::max(1LL, traj.total_newton_iters);
    m.eta = std::max(1LL, (traj.total_gmres_iters + newt - 1) / newt);
  } else {
    m.eta = k;
  }
  return flop_estimate(m, alg);
}

void print_sod_conservation(const Euler1d& sys, const Eigen::MatrixXd& snaps) {
  if (snaps.cols() == 0) return;
  const int n = sys.n_cells();
  const double dx = sys.dx();
  const char* names[3] = {"mass", "momentum", "energy"};
  for (int v = 0; v < 3; ++v) {
    const double first = snaps.col(0).segment(v * n, n).sum() * dx;
    const double last = snaps.col(snaps.cols() - 1).segment(v * n, n).sum() * dx;
    std::cout << "conservation " << names[v] << ": first=" << num(first)
              << " last=" << num(last) << " drift=" << num(last - first)
              << "\n";
  }
}

// Integrates a hyper-reduced Galerkin or APG coefficient ODE; LSPG uses the
// collocated Gauss-Newton step instead.
Trajectory run_hyper_rom(const FomSystem& sys, const TrialBasis& basis,
                         const HyperData& hd, const Eigen::VectorXd& a0,
                         const RomMethod& method, const IntegratorSpec& ispec,
                         const SaveSpec& save, double tau,
                         bool* all_converged) {
  *all_converged = true;
  if (method.kind == RomMethod::Kind::Lspg) {
    if (!is_implicit(ispec.scheme)) {
      throw InvalidArgument("collocated lspg requires an implicit scheme");
    }
    LspgConfig lcfg;
    lcfg.jac_mode = method.jac_mode;
    lcfg.jac_eps = method.fd_eps;
    const double ratio = ispec.t_final / ispec.dt;
    const long long n_steps = std::max(
        1LL, static_cast<long long>(
                 std::ceil(ratio - 1e-12 * std::max(1.0, ratio))));
    Trajectory traj;
    std::vector<Eigen::VectorXd> saved;
    Eigen::VectorXd a = a0;
    double t = 0.0;
    const double t0 = now_s();
    for (long long k = 0; k < n_steps; ++k) {
      const double t_next =
          (k + 1 == n_steps) ? ispec.t_final : ispec.dt * double(k + 1);
      LspgResult r = collocated_lspg_step(a, sys, basis, hd.sample_indices,
                                          t_next - t, ispec.scheme, lcfg);
      a = r.a;
      t = t_next;
      traj.steps += 1;
      traj.total_newton_iters += r.iterations;
      traj.newton_iters_per_step.push_back(r.iterations);
      if (!r.converged) {
        traj.newton_ok = false;
        *all_converged = false;
      }
      if (!a.allFinite() || a.cwiseAbs().maxCoeff() > ispec.blowup) {
        traj.stable = false;
        break;
      }
      if ((k + 1) % save.every == 0) {
        saved.push_back(a);
        traj.times.push_back(t_next);
      }
    }
    traj.wall_seconds = now_s() - t0;
    traj.states.resize(a0.size(), static_cast<Eigen::Index>(saved.size()));
    for (std::size_t i = 0; i < saved.size(); ++i) {
      traj.states.col(static_cast<Eigen::Index>(i)) = saved[i];
    }
    return traj;
  }
  OdeSystem ode;
  ode.dim = basis.k();
  ode.rhs = [&](const Eigen::VectorXd& a) {
    return hyper_apg_rhs(a, sys, basis, hd, tau, method.fd_eps);
  };
  return integrate(ode, a0, ispec, save);
}

std::vector<std::string> runs_csv_header() {
  return {"method",
          "scheme",
          "k",
          "tau_s",
          "dt_s",
          "t_final_s",
          "integrated_error_l2_s",
          "stable",
          "newton_converged",
          "steps",
          "newton_iters_total",
          "gmres_iters_total",
          "flops_per_step",
          "hyper_np",
          "hyper_stencil_rows"};
}

}  // namespace

int cmd_fom_run(const DriverOptions& opt) {
  const RunConfig cfg = load_effective(opt, true);
  fs::create_directories(cfg.outputs.dir);
  ProblemSetup setup = make_problem(cfg);

  Trajectory traj;
  if (cfg.fom.t_final <= 0.0) {
    traj.times = {0.0};
    traj.states = setup.u0;
    traj.stable = true;
  } else {
    const OdeSystem ode = wrap_fom(*setup.sys);
    traj = integrate(ode, setup.u0, cfg.fom,
                     SaveSpec{cfg.outputs.save_every, false});
  }

  io::write_matrix(snapshots_path(cfg), traj.states);
  json meta;
  meta["kind"] = "fom_snapshots";
  meta["problem"] = setup.name;
  meta["scheme"] = scheme_name(cfg.fom.scheme);
  meta["dt"] = cfg.fom.dt;
  meta["t_final"] = cfg.fom.t_final;
  meta["save_every"] = cfg.outputs.save_every;
  meta["times"] = traj.times;
  meta["n_vars"] = setup.n_vars;
  meta["n_cells"] = setup.n_cells;
  meta["seed"] = cfg.seed;
  meta["stable"] = traj.stable;
  io::write_sidecar(snapshots_path(cfg), meta);

  std::cout << "fom-run: problem=" << setup.name << " n=" << setup.sys->dim()
            << " scheme=" << scheme_name(cfg.fom.scheme)
            << " dt_s=" << num(cfg.fom.dt) << " steps=" << traj.steps
            << " snapshots=" << traj.states.cols()
            << " wall_time_s=" << num(traj.wall_seconds)
            << " stable=" << (traj.stable ? 1 : 0) << "\n";
  if (const auto* euler = dynamic_cast<const Euler1d*>(setup.sys.get())) {
    print_sod_conservation(*euler, traj.states);
  }
  if (!traj.stable) {
    std::cerr << "fom-run: trajectory unstable (state exceeded "
              << num(cfg.fom.blowup) << ")\n";
    return 3;
  }
  return 0;
}

int cmd_pod_build(const DriverOptions& opt) {
  const RunConfig cfg = load_effective(opt, true);
  fs::create_directories(cfg.outputs.dir);
  const SnapshotSet snaps = read_snapshots(cfg);
  if (snaps.states.cols() < 1) throw MissingArtifact("snapshot set is empty");

  TrialBasis tb(Eigen::MatrixXd::Identity(1, 1));
  if (cfg.pod.per_variable) {
    const int n_vars = snaps.meta.value("n_vars", 1);
    if (n_vars < 1 || snaps.states.rows() % n_vars != 0) {
      throw ConfigError("pod: state dimension " +
                        std::to_string(snaps.states.rows()) +
                        " is not divisible by " + std::to_string(n_vars) +
                        " variables");
    }
    const Eigen::Index rows = snaps.states.rows() / n_vars;
    std::vector<VarBlock> blocks;
    for (int v = 0; v < n_vars; ++v) {
      auto [u, sig] = pod_build(snaps.states.middleRows(v * rows, rows));
      Eigen::Index kv;
      if (cfg.pod.k_per_var > 0) {
        kv = std::min<Eigen::Index>(cfg.pod.k_per_var, u.cols());
      } else {
        kv = truncate_energy(sig, cfg.pod.energy);
      }
      std::cout << "pod-build: variable=" << v << " rows=" << rows
                << " k=" << kv << " sigma_1=" << num(sig(0))
                << " sigma_k=" << num(sig(kv - 1)) << "\n";
      blocks.push_back(VarBlock{v * rows, u.leftCols(kv), sig.head(kv)});
    }
    tb = assemble_block_basis(blocks);
  } else {
    auto [u, sig] = pod_build(snaps.states);
    Eigen::Index k;
    if (cfg.pod.k > 0) {
      k = std::min<Eigen::Index>(cfg.pod.k, u.cols());
    } else {
      k = truncate_energy(sig, cfg.pod.energy);
    }
    std::cout << "pod-build: global rows=" << snaps.states.rows() << " k=" << k
              << " sigma_1=" << num(sig(0)) << " sigma_k=" << num(sig(k - 1))
              << "\n";
    tb = TrialBasis(u.leftCols(k), sig.head(k));
  }

  io::write_matrix(basis_path(cfg), tb.dense());
  json meta;
  meta["kind"] = "basis";
  meta["per_variable"] = cfg.pod.per_variable;
  meta["k"] = tb.k();
  json blocks = json::array();
  for (const auto& b : tb.block_layout()) {
    blocks.push_back({{"row_begin", b.row_begin},
                      {"rows", b.rows},
                      {"col_begin", b.col_begin},
                      {"cols", b.cols}});
  }
  meta["blocks"] = blocks;
  meta["singular_values"] =
      std::vector<double>(tb.singular_values().data(),
                          tb.singular_values().data() + tb.singular_values().size());
  io::write_sidecar(basis_path(cfg), meta);
  std::cout << "pod-build: wrote basis n=" << tb.n() << " k=" << tb.k() << "\n";
  return 0;
}

int cmd_rom_run(const DriverOptions& opt) {
  const double t_start = now_s();
  const RunConfig cfg = load_effective(opt, true);
  fs::create_directories(cfg.outputs.dir);
  ProblemSetup setup = make_problem(cfg);
  const SnapshotSet snaps = read_snapshots(cfg);
  const TrialBasis full = read_basis(cfg);
  if (full.n() != setup.sys->dim()) {
    throw ConfigError("basis rows " + std::to_string(full.n()) +
                      " do not match the problem dimension " +
                      std::to_string(setup.sys->dim()));
  }
  const TrialBasis tb = truncate_basis(full, cfg.rom.k);
  const double t_setup = now_s();

  const Eigen::VectorXd a0 = tb.apply_t(setup.u0);
  const double ic_defect = (setup.u0 - tb.apply(a0)).norm();

  IntegratorSpec ispec = cfg.rom.ispec;
  if (ispec.t_final <= 0.0) {
    if (snaps.times.empty() || snaps.times.back() <= 0.0) {
      throw ConfigError("rom.t_final: snapshot horizon is zero, set it explicitly");
    }
    ispec.t_final = snaps.times.back();
  }
  const SaveSpec save{cadence_every(snaps.times, ispec.dt), false};

  RomRunResult rr;
  int hyper_np = 0;
  int hyper_ns = 0;
  if (cfg.hyper.enabled) {
    Eigen::MatrixXd rhs_snaps(snaps.states.rows(), snaps.states.cols());
    Eigen::VectorXd tmp;
    for (Eigen::Index j = 0; j < snaps.states.cols(); ++j) {
      setup.sys->rhs(snaps.states.col(j), tmp);
      rhs_snaps.col(j) = tmp;
    }
    const HyperData hd = gappy_offline(rhs_snaps, cfg.hyper.r,
                                       cfg.hyper.target_np, *setup.sys, tb);
    hyper_np = static_cast<int>(hd.np());
    hyper_ns = static_cast<int>(hd.ns());
    double tau = cfg.rom.method.tau;
    if (cfg.rom.method.kind == RomMethod::Kind::Apg &&
        cfg.rom.method.tau_auto) {
      tau = tau_heuristic(a0, *setup.sys, tb, cfg.rom.method.tau_c);
    }
    if (cfg.rom.method.kind == RomMethod::Kind::Galerkin) tau = 0.0;
    rr.tau = tau;
    rr.traj = run_hyper_rom(*setup.sys, tb, hd, a0, cfg.rom.method, ispec,
                            save, tau, &rr.all_steps_converged);
  } else {
    rr = run_rom(*setup.sys, tb, a0, cfg.rom.method, ispec, save);
  }
  const double t_run = now_s();

  // Error against the stored snapshots over the common saved times.
  const Eigen::Index n_common =
      std::min<Eigen::Index>(rr.traj.states.cols(),
                             static_cast<Eigen::Index>(snaps.times.size()));
  Trajectory rom_cmp = rr.traj;
  rom_cmp.states = rr.traj.states.leftCols(n_common);
  rom_cmp.times.assign(rr.traj.times.begin(), rr.traj.times.begin() + n_common);
  const Trajectory fom_cmp = as_trajectory(
      snaps.states.leftCols(n_common),
      std::vector<double>(snaps.times.begin(), snaps.times.begin() + n_common));
  ErrorSeries err;
  bool have_err = false;
  if (n_common > 0 && rr.traj.stable) {
    err = error_norm(rom_cmp, fom_cmp, tb);
    have_err = true;
  }
  const double t_err = now_s();

  const std::string traj_path = cfg.outputs.dir + "/rom_trajectory.romf";
  io::write_matrix(traj_path, rr.traj.states);
  json meta;
  meta["kind"] = "rom_trajectory";
  meta["method"] = method_name(cfg.rom.method.kind);
  meta["scheme"] = scheme_name(ispec.scheme);
  meta["times"] = rr.traj.times;
  meta["tau"] = rr.tau;
  meta["k"] = tb.k();
  meta["dt"] = ispec.dt;
  meta["hyper_np"] = hyper_np;
  io::write_sidecar(traj_path, meta);

  if (have_err) {
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < err.e_l2.size(); ++i) {
      rows.push_back({num(err.times[static_cast<std::size_t>(i)]),
                      num(err.e_l2(i))});
    }
    io::write_csv(cfg.outputs.dir + "/rom_error.csv",
                  {"time_s", "state_error_l2"}, rows);
  }

  const long long flops =
      flops_for_run(cfg, *setup.sys, static_cast<int>(tb.k()), cfg.rom.method,
                    ispec, rr.traj, hyper_np, hyper_ns);
  std::vector<std::vector<std::string>> run_rows;
  run_rows.push_back({method_name(cfg.rom.method.kind),
                      scheme_name(ispec.scheme),
                      num(static_cast<int>(tb.k())),
                      num(rr.tau),
                      num(ispec.dt),
                      num(ispec.t_final),
                      have_err ? num(err.integrated) : "nan",
                      rr.traj.stable ? "1" : "0",
                      rr.all_steps_converged ? "1" : "0",
                      num(rr.traj.steps),
                      num(rr.traj.total_newton_iters),
                      num(rr.traj.total_gmres_iters),
                      num(flops),
                      num(hyper_np),
                      num(hyper_ns)});
  io::write_csv(cfg.outputs.dir + "/runs.csv", runs_csv_header(), run_rows);

  std::vector<std::vector<std::string>> timing_rows = {
      {"setup", num(t_setup - t_start)},
      {"rom_time_loop", num(rr.traj.wall_seconds)},
      {"rom_overhead", num(t_run - t_setup - rr.traj.wall_seconds)},
      {"error_eval", num(t_err - t_run)},
  };
  io::write_csv(cfg.outputs.dir + "/timings.csv", {"phase", "wall_time_s"},
                timing_rows);

  std::cout << "rom-run: method=" << method_name(cfg.rom.method.kind)
            << " scheme=" << scheme_name(ispec.scheme) << " k=" << tb.k()
            << " tau_s=" << num(rr.tau) << " dt_s=" << num(ispec.dt)
            << " ic_defect_l2=" << num(ic_defect)
            << " integrated_error_l2_s=" << (have_err ? num(err.integrated) : "nan")
            << " stable=" << (rr.traj.stable ? 1 : 0)
            << " wall_time_s=" << num(rr.traj.wall_seconds) << "\n";
  return rr.traj.stable ? 0 : 3;
}

int cmd_sweep(const DriverOptions& opt) {
  const RunConfig cfg = load_effective(opt, true);
  fs::create_directories(cfg.outputs.dir);
  ProblemSetup setup = make_problem(cfg);
  const SnapshotSet snaps = read_snapshots(cfg);
  const TrialBasis full = read_basis(cfg);
  if (full.n() != setup.sys->dim()) {
    throw ConfigError("basis rows " + std::to_string(full.n()) +
                      " do not match the problem dimension " +
                      std::to_string(setup.sys->dim()));
  }

  std::vector<int> kk = cfg.sweep.k;
  if (kk.empty()) kk.push_back(static_cast<int>(full.k()));
  std::vector<double> dts = cfg.sweep.dt;
  if (dts.empty()) dts.push_back(cfg.rom.ispec.dt);
  std::vector<std::string> methods = cfg.sweep.methods;
  if (methods.empty()) methods.push_back(method_name(cfg.rom.method.kind));
  std::vector<double> taus = cfg.sweep.tau;
  if (taus.empty()) taus.push_back(cfg.rom.method.tau);

  double horizon = cfg.rom.ispec.t_final;
  if (horizon <= 0.0) {
    if (snaps.times.empty() || snaps.times.back() <= 0.0) {
      throw ConfigError("rom.t_final: snapshot horizon is zero, set it explicitly");
    }
    horizon = snaps.times.back();
  }

  // Pre-validate the whole grid, pre-truncate the bases, then run.
  std::map<int, TrialBasis> bases;
  for (int k : kk) bases.emplace(k, truncate_basis(full, k));
  for (double dt : dts) cadence_every(snaps.times, dt);

  struct Job {
    int k;
    std::string method;  // base name
    Scheme scheme;
    double tau;
    double dt;
  };
  std::vector<Job> jobs;
  for (int k : kk) {
    for (const std::string& token : methods) {
      std::string base = token;
      Scheme scheme = cfg.rom.ispec.scheme;
      const auto slash = token.find('/');
      if (slash != std::string::npos) {
        base = token.substr(0, slash);
        scheme = scheme_from_name(token.substr(slash + 1));
      }
      if (base == "lspg" && !is_implicit(scheme)) {
        throw ConfigError("sweep.methods: lspg requires an implicit scheme");
      }
      const std::vector<double> method_taus =
          base == "apg" ? taus : std::vector<double>{0.0};
      for (double dt : dts) {
        for (double tau : method_taus) {
          jobs.push_back(Job{k, base, scheme, tau, dt});
        }
      }
    }
  }

  const Trajectory fom_ref = as_trajectory(snaps.states, snaps.times);
  std::vector<std::vector<std::string>> rows(jobs.size());
  std::atomic<std::size_t> next{0};

  auto run_job = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const TrialBasis& tb = bases.at(job.k);
    RomMethod method = cfg.rom.method;
    if (job.method == "galerkin") {
      method = RomMethod::galerkin();
    } else if (job.method == "apg") {
      method = RomMethod::apg(job.tau, cfg.rom.method.jac_mode);
    } else {
      method = RomMethod::lspg();
    }
    method.jac_mode = cfg.rom.method.jac_mode;
    method.fd_eps = cfg.rom.method.fd_eps;
    method.jfnk_eps = cfg.rom.method.jfnk_eps;

    IntegratorSpec ispec = cfg.rom.ispec;
    ispec.scheme = job.scheme;
    ispec.dt = job.dt;
    ispec.t_final = horizon;
    const SaveSpec save{cadence_every(snaps.times, job.dt), false};

    double integrated = std::numeric_limits<double>::quiet_NaN();
    bool stable = false;
    bool newton_ok = false;
    long long steps = 0, newton_iters = 0, gmres_iters = 0;
    double wall = 0.0, tau_used = job.tau;
    long long flops = 0;
    try {
      const Eigen::VectorXd a0 = tb.apply_t(setup.u0);
      RomRunResult rr = run_rom(*setup.sys, tb, a0, method, ispec, save);
      stable = rr.traj.stable;
      newton_ok = rr.all_steps_converged;
      steps = rr.traj.steps;
      newton_iters = rr.traj.total_newton_iters;
      gmres_iters = rr.traj.total_gmres_iters;
      wall = rr.traj.wall_seconds;
      tau_used = rr.tau;
      flops = flops_for_run(cfg, *setup.sys, job.k, method, ispec, rr.traj, 0, 0);
      if (stable) {
        const Eigen::Index n_common = std::min<Eigen::Index>(
            rr.traj.states.cols(), fom_ref.states.cols());
        Trajectory rom_cmp = rr.traj;
        rom_cmp.states = rr.traj.states.leftCols(n_common);
        rom_cmp.times.assign(rr.traj.times.begin(),
                             rr.traj.times.begin() + n_common);
        Trajectory fom_cmp = as_trajectory(
            fom_ref.states.leftCols(n_common),
            std::vector<double>(fom_ref.times.begin(),
                                fom_ref.times.begin() + n_common));
        integrated = error_norm(rom_cmp, fom_cmp, tb).integrated;
      }
    } catch (const RomError&) {
      stable = false;
    }
    rows[idx] = {num(static_cast<int>(idx)),
                 job.method,
                 scheme_name(job.scheme),
                 num(job.k),
                 num(tau_used),
                 num(job.dt),
                 num(integrated),
                 stable ? "1" : "0",
                 newton_ok ? "1" : "0",
                 num(steps),
                 num(newton_iters),
                 num(gmres_iters),
                 num(flops),
                 num(wall)};
  };

  const int workers = std::max(1, opt.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          run_job(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<std::string> header = {
      "run",   "method", "scheme", "k",
      "tau_s", "dt_s",   "integrated_error_l2_s", "stable",
      "newton_converged", "steps", "newton_iters_total", "gmres_iters_total",
      "flops_per_step", "wall_time_s"};
  io::write_csv(cfg.outputs.dir + "/sweep.csv", header, rows);
  std::cout << "sweep: " << jobs.size() << " runs written to "
            << cfg.outputs.dir << "/sweep.csv\n";
  return 0;
}

int cmd_verify(const DriverOptions& opt) {
  const RunConfig cfg = load_effective(opt, false);
  fs::create_directories(cfg.outputs.dir);
  Report rep = run_verification_suite(cfg.verify.cases, cfg.seed);

  if (cfg.problem.kind == ProblemConfig::Kind::LtiDiffusion) {
    const int n = cfg.problem.lti_n;
    const double dx =
        cfg.problem.lti_dx > 0.0 ? cfg.problem.lti_dx : 1.0 / (n + 1);
    const LtiSystem sys(diffusion_matrix(n, dx));
    const int k = std::min(6, n / 2 > 0 ? n / 2 : 1);
    const Eigen::MatrixXd v = sys.eigenvectors().real().leftCols(k);
    const TrialBasis tb(v);
    const Eigen::VectorXd u0 = Rng(cfg.seed).normal_vector(n).normalized();
    const Eigen::VectorXd lam = sys.real_eigenvalues();
    const double bound =
        std::abs(lam(0)) / (lam(lam.size() - 1) * lam(lam.size() - 1));
    rep.append(verify_lti_error_bound(sys, tb, u0, {0.0, 0.5, 1.0}, bound),
               "diffusion/");
    rep.append(verify_eigen_ordering(sys, tb), "diffusion/");
    rep.append(verify_residual_split(sys, tb, u0, 1.0), "diffusion/");
  }

  rep.to_csv(cfg.outputs.dir + "/verify_report.csv");
  std::cout << rep.summary();
  for (const auto& row : rep.rows) {
    if (!row.pass) {
      std::cout << "FAILED " << row.name << " lhs=" << num(row.lhs)
                << " rhs=" << num(row.rhs) << "\n";
    }
  }
  return rep.all_pass() ? 0 : 5;
}

int cmd_cost(const DriverOptions& opt) {
  const RunConfig cfg = load_effective(opt, false);
  fs::create_directories(cfg.outputs.dir);
  const Algorithm algs[] = {Algorithm::GalerkinExplicit,
                            Algorithm::ApgExplicit,
                            Algorithm::GalerkinImplicit,
                            Algorithm::ApgImplicitDirect,
                            Algorithm::ApgImplicitJfnk,
                            Algorithm::Lspg};
  std::vector<std::vector<std::string>> rows;
  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = 0.0;
  for (long long k = cfg.cost.k_step; k <= cfg.cost.k_max;
       k += cfg.cost.k_step) {
    CostModel m;
    m.n = cfg.cost.n;
    m.k = k;
    m.omega = cfg.cost.omega;
    m.eta = k;
    const long long gal_exp = flop_estimate(m, Algorithm::GalerkinExplicit);
    const long long gal_imp = flop_estimate(m, Algorithm::GalerkinImplicit);
    for (Algorithm alg : algs) {
      const long long f = flop_estimate(m, alg);
      const bool explicit_class =
          alg == Algorithm::GalerkinExplicit || alg == Algorithm::ApgExplicit;
      const double ratio =
          double(f) / double(explicit_class ? gal_exp : gal_imp);
      rows.push_back({num(k), alg_name(alg), num(f), num(ratio)});
      if (alg == Algorithm::ApgExplicit && k <= 100) {
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
      }
    }
  }
  io::write_csv(cfg.outputs.dir + "/cost.csv",
                {"k", "algorithm", "flops_per_step", "ratio_vs_galerkin"},
                rows);
  std::cout << "cost: n=" << cfg.cost.n << " omega=" << cfg.cost.omega
            << " rows=" << rows.size()
            << " apg_explicit_ratio_k_le_100=[" << num(ratio_min) << ", "
            << num(ratio_max) << "]\n";
  return 0;
}

}  // namespace romkit
