#include "romkit/rom.hpp"

#include <Eigen/LU>
#include <chrono>
#include <cmath>
#include <memory>

#include "romkit/errors.hpp"
#include "romkit/rng.hpp"

namespace romkit {

namespace {

void check_pair(const FomSystem& sys, const TrialBasis& basis) {
  if (basis.n() != sys.dim())
    throw DimensionMismatch("basis rows " + std::to_string(basis.n()) +
                            " do not match system dimension " +
                            std::to_string(sys.dim()));
}

}  // namespace

Eigen::VectorXd galerkin_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                             const TrialBasis& basis) {
  check_pair(sys, basis);
  if (a.size() != basis.k())
    throw DimensionMismatch("galerkin_rhs: coordinate length mismatch");
  return basis.apply_t(sys.rhs(basis.apply(a)));
}

Eigen::VectorXd apg_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                        const TrialBasis& basis, double tau, JacMode jac_mode,
                        double eps) {
  check_pair(sys, basis);
  if (a.size() != basis.k())
    throw DimensionMismatch("apg_rhs: coordinate length mismatch");
  if (tau < 0.0) throw InvalidArgument("apg_rhs: tau must be nonnegative");
  const Eigen::VectorXd u = basis.apply(a);
  const Eigen::VectorXd r = sys.rhs(u);
  const Eigen::VectorXd ar = basis.apply_t(r);
  const Eigen::VectorXd rp = r - basis.apply(ar);
  Eigen::VectorXd jv;
  if (jac_mode == JacMode::FiniteDiff) {
    if (!(eps > 0.0)) throw InvalidArgument("apg_rhs: eps must be positive");
    jv = (sys.rhs(u + eps * rp) - r) / eps;
  } else {
    jv = sys.jac_dense(u) * rp;
  }
  return ar + tau * basis.apply_t(jv);
}

Eigen::VectorXd apg_test_basis_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                                   const TrialBasis& basis, double tau) {
  check_pair(sys, basis);
  if (a.size() != basis.k())
    throw DimensionMismatch("apg_test_basis_rhs: coordinate length mismatch");
  if (tau < 0.0) throw InvalidArgument("apg_test_basis_rhs: tau must be nonnegative");
  const Eigen::VectorXd u = basis.apply(a);
  const Eigen::MatrixXd j = sys.jac_dense(u);
  const Eigen::VectorXd r = sys.rhs(u);
  const Eigen::MatrixXd& v = basis.dense();
  Eigen::MatrixXd m = j.transpose() * v;
  m -= v * (v.transpose() * m);
  return (v + tau * m).transpose() * r;
}

namespace detail {

LspgResult lspg_core(const Eigen::VectorXd& a_prev, const FomSystem& sys,
                     const TrialBasis& basis, const std::vector<int>* rows,
                     double dt, Scheme scheme, const LspgConfig& cfg) {
  check_pair(sys, basis);
  if (a_prev.size() != basis.k())
    throw DimensionMismatch("lspg_step: coordinate length mismatch");
  if (!is_implicit(scheme))
    throw InvalidArgument("lspg_step: least-squares stepping needs an implicit scheme");
  if (!(dt > 0.0)) throw InvalidArgument("lspg_step: dt must be positive");
  const Eigen::Index k = basis.k();
  const double c = scheme == Scheme::ImplicitEuler ? 1.0 : 0.5;

  // Residual evaluation, full-space or collocated on sample rows.
  std::vector<int> stencil;
  Eigen::MatrixXd vs;       // sampled rows of Ṽ
  Eigen::MatrixXd vst;      // stencil rows of Ṽ
  Eigen::VectorXd u_work;   // full-length scratch (stencil rows valid)
  const bool collocated = rows != nullptr;
  if (collocated) {
    if (static_cast<Eigen::Index>(rows->size()) < k)
      throw RankDeficientNormalEquations(
          "collocated residual has fewer rows than basis columns");
    stencil = sys.stencil_rows(*rows);
    vs = basis.restrict_rows(*rows);
    vst = basis.restrict_rows(stencil);
    u_work = Eigen::VectorXd::Zero(basis.n());
  }

  auto reconstruct = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
    if (!collocated) return basis.apply(a);
    const Eigen::VectorXd u_st = vst * a;
    for (std::size_t i = 0; i < stencil.size(); ++i)
      u_work[stencil[i]] = u_st[static_cast<Eigen::Index>(i)];
    return u_work;
  };
  auto rhs_eval = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    if (!collocated) return sys.rhs(u);
    Eigen::VectorXd out;
    sys.rhs_rows(u, *rows, out);
    return out;
  };

  const Eigen::VectorXd u_prev = reconstruct(a_prev);
  const Eigen::VectorXd up_sampled = collocated ? (vs * a_prev).eval() : u_prev;
  Eigen::VectorXd cn_term;
  if (scheme == Scheme::CrankNicolson) cn_term = c * rhs_eval(u_prev);

  struct Eval {
    Eigen::VectorXd u;   // reconstruction (full or stencil-embedded)
    Eigen::VectorXd r;   // residual rows
    Eigen::VectorXd f;   // RHS rows at u
    double cost;
  };
  auto evaluate = [&](const Eigen::VectorXd& a) -> Eval {
    Eval e;
    e.u = reconstruct(a);
    e.f = rhs_eval(e.u);
    const Eigen::VectorXd u_sampled = collocated ? (vs * a).eval() : e.u;
    e.r = (u_sampled - up_sampled) / dt - c * e.f;
    if (scheme == Scheme::CrankNicolson) e.r -= cn_term;
    e.cost = e.r.squaredNorm();
    return e;
  };

  LspgResult out;
  out.a = a_prev;
  Eval cur = evaluate(out.a);
  for (int it = 0; it < cfg.max_iter; ++it) {
    // W = (∂r/∂u)Ṽ restricted to the residual rows.
    Eigen::MatrixXd w(cur.r.size(), k);
    if (cfg.jac_mode == JacMode::Exact) {
      const Eigen::MatrixXd j = sys.jac_dense(cur.u);
      if (!collocated) {
        w = basis.dense() / dt - c * (j * basis.dense());
      } else {
        for (std::size_t i = 0; i < rows->size(); ++i)
          w.row(static_cast<Eigen::Index>(i)) =
              vs.row(static_cast<Eigen::Index>(i)) / dt -
              c * (j.row((*rows)[i]) * basis.dense());
      }
    } else {
      // Forward difference through the RHS, sharing the base evaluation.
      for (Eigen::Index col = 0; col < k; ++col) {
        Eigen::VectorXd u_pert;
        Eigen::VectorXd v_rows;
        if (!collocated) {
          u_pert = cur.u + cfg.jac_eps * basis.dense().col(col);
          v_rows = basis.dense().col(col);
        } else {
          u_pert = cur.u;
          for (std::size_t i = 0; i < stencil.size(); ++i)
            u_pert[stencil[i]] += cfg.jac_eps * vst(static_cast<Eigen::Index>(i), col);
          v_rows = vs.col(col);
        }
        const Eigen::VectorXd f_pert = rhs_eval(u_pert);
        w.col(col) = v_rows / dt - c * (f_pert - cur.f) / cfg.jac_eps;
      }
    }

    const Eigen::VectorXd g = w.transpose() * cur.r;
    out.grad_norm = g.cwiseAbs().maxCoeff();
    if (out.grad_norm <= cfg.grad_tol) {
      out.converged = true;
      break;
    }

    const Eigen::MatrixXd h = w.transpose() * w;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    const double h_max = h.cwiseAbs().maxCoeff();
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-14 * h_max)
      throw RankDeficientNormalEquations(
          "lspg_step: normal-equations pivot below 1e-14 of the matrix scale");
    const Eigen::VectorXd delta = lu.solve(-g);

    double alpha = 1.0;
    Eval next = evaluate(out.a + alpha * delta);
    int bt = 0;
    while (next.cost > cur.cost && bt < cfg.max_backtracks) {
      alpha *= 0.5;
      next = evaluate(out.a + alpha * delta);
      ++bt;
    }
    if (next.cost > cur.cost) break;  // no acceptable step; keep best iterate

    out.a += alpha * delta;
    ++out.iterations;
    const double drop = cur.cost - next.cost;
    cur = std::move(next);
    if (drop <= cfg.rel_cost_tol * std::max(cur.cost, 1e-300)) {
      out.converged = true;
      break;
    }
  }
  out.cost = cur.cost;
  return out;
}

}  // namespace detail

LspgResult lspg_step(const Eigen::VectorXd& a_prev, const FomSystem& sys,
                     const TrialBasis& basis, double dt, Scheme scheme,
                     const LspgConfig& cfg) {
  return detail::lspg_core(a_prev, sys, basis, nullptr, dt, scheme, cfg);
}

double tau_heuristic(const Eigen::VectorXd& a, const FomSystem& sys,
                     const TrialBasis& basis, double c) {
  check_pair(sys, basis);
  if (a.size() != basis.k())
    throw DimensionMismatch("tau_heuristic: coordinate length mismatch");
  if (c < 0.0) throw InvalidArgument("tau_heuristic: C must be nonnegative");
  const Eigen::Index k = basis.k();
  const Eigen::VectorXd u = basis.apply(a);
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    m.col(j) = basis.apply_t(sys.jac_vec(u, basis.dense().col(j)));

  Rng rng(2718281828ULL);
  Eigen::VectorXd x = rng.normal_vector(k);
  x /= x.norm();
  double rho = 0.0, rho_prev = -1.0;
  bool converged = false;
  std::vector<double> history;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd y = m * x;
    rho = y.norm();
    if (rho < 1e-14) throw ZeroSpectralRadius("tau_heuristic: coarse Jacobian has vanishing spectral radius");
    history.push_back(rho);
    if (rho_prev >= 0.0 && std::abs(rho - rho_prev) <= 1e-8 * rho) {
      converged = true;
      break;
    }
    x = y / rho;
    rho_prev = rho;
  }
  if (!converged) {
    // Oscillating estimates (complex dominant pair): use the geometric mean
    // of the growth factors over the second half of the iteration.
    double acc = 0.0;
    const std::size_t half = history.size() / 2;
    for (std::size_t i = half; i < history.size(); ++i) acc += std::log(history[i]);
    rho = std::exp(acc / static_cast<double>(history.size() - half));
  }
  if (rho < 1e-14) throw ZeroSpectralRadius("tau_heuristic: coarse Jacobian has vanishing spectral radius");
  return c / rho;
}

RomMethod RomMethod::galerkin() {
  RomMethod m;
  m.kind = Kind::Galerkin;
  return m;
}

RomMethod RomMethod::apg(double tau, JacMode mode, double eps) {
  if (tau < 0.0) throw InvalidArgument("RomMethod::apg: tau must be nonnegative");
  RomMethod m;
  m.kind = Kind::Apg;
  m.tau = tau;
  m.jac_mode = mode;
  m.fd_eps = eps;
  return m;
}

RomMethod RomMethod::apg_auto(double c, JacMode mode) {
  if (c < 0.0) throw InvalidArgument("RomMethod::apg_auto: C must be nonnegative");
  RomMethod m;
  m.kind = Kind::Apg;
  m.tau_auto = true;
  m.tau_c = c;
  m.jac_mode = mode;
  return m;
}

RomMethod RomMethod::lspg() {
  RomMethod m;
  m.kind = Kind::Lspg;
  return m;
}

RomRunResult run_rom(const FomSystem& sys, const TrialBasis& basis,
                     const Eigen::VectorXd& a0, const RomMethod& method,
                     const IntegratorSpec& ispec, const SaveSpec& save) {
  check_pair(sys, basis);
  if (a0.size() != basis.k())
    throw DimensionMismatch("run_rom: coordinate length mismatch");
  if (method.kind == RomMethod::Kind::Lspg && !is_implicit(ispec.scheme))
    throw InvalidArgument("run_rom: LSPG requires an implicit scheme");
  if (!(ispec.dt > 0.0)) throw InvalidArgument("run_rom: dt must be positive");
  if (!(ispec.t_final > 0.0)) throw InvalidArgument("run_rom: t_final must be positive");
  if (save.every < 1) throw InvalidArgument("run_rom: save.every must be >= 1");

  RomRunResult out;
  out.tau = method.tau;
  double tau_now = method.tau;
  if (method.kind == RomMethod::Kind::Apg && method.tau_auto) {
    tau_now = tau_heuristic(a0, sys, basis, method.tau_c);
    out.tau = tau_now;
  }

  const RhsFn rom_rhs = [&sys, &basis, &method, &tau_now](const Eigen::VectorXd& a) {
    if (method.kind == RomMethod::Kind::Galerkin)
      return galerkin_rhs(a, sys, basis);
    return apg_rhs(a, sys, basis, tau_now, method.jac_mode, method.fd_eps);
  };

  // Jacobian-vector action for JFNK: forward difference of the closure RHS
  // with the base evaluation memoized per Newton iterate.
  struct Memo {
    bool valid = false;
    Eigen::VectorXd y;
    Eigen::VectorXd r;
  };
  auto memo = std::make_shared<Memo>();
  const double jeps = (method.kind == RomMethod::Kind::Apg &&
                       method.jac_mode == JacMode::FiniteDiff)
                          ? method.jfnk_eps
                          : 1e-5;
  const JacVecFn rom_jv = [rom_rhs, memo, jeps](const Eigen::VectorXd& y,
                                                const Eigen::VectorXd& v) {
    if (!memo->valid || memo->y.size() != y.size() || memo->y != y) {
      memo->r = rom_rhs(y);
      memo->y = y;
      memo->valid = true;
    }
    return ((rom_rhs(y + jeps * v) - memo->r) / jeps).eval();
  };
  const JacFn rom_jac = [rom_rhs](const Eigen::VectorXd& y) {
    return fd_jacobian(rom_rhs, y);
  };

  LspgConfig lspg_cfg;
  lspg_cfg.max_iter = ispec.newton_max_iter;
  lspg_cfg.grad_tol = ispec.newton_tol;
  lspg_cfg.jac_eps = method.fd_eps;
  lspg_cfg.jac_mode = method.jac_mode;

  const double ratio = ispec.t_final / ispec.dt;
  const long long n_steps =
      std::max<long long>(1, static_cast<long long>(
                                 std::ceil(ratio - 1e-12 * std::max(1.0, ratio))));

  Trajectory traj;
  std::vector<Eigen::VectorXd> saved;
  std::vector<double> times;
  if (save.include_initial) {
    saved.push_back(a0);
    times.push_back(0.0);
  }

  Eigen::VectorXd a = a0;
  const auto t_start = std::chrono::steady_clock::now();
  for (long long kstep = 0; kstep < n_steps; ++kstep) {
    const double t_next =
        (kstep + 1 == n_steps) ? ispec.t_final : ispec.dt * double(kstep + 1);
    const double dt_step = t_next - ispec.dt * double(kstep);
    try {
      if (method.kind == RomMethod::Kind::Apg && method.tau_per_step && kstep > 0)
        tau_now = tau_heuristic(a, sys, basis, method.tau_c);
      if (method.kind == RomMethod::Kind::Lspg) {
        const LspgResult rr = lspg_step(a, sys, basis, dt_step, ispec.scheme, lspg_cfg);
        traj.total_newton_iters += rr.iterations;
        traj.newton_iters_per_step.push_back(rr.iterations);
        traj.newton_ok = traj.newton_ok && rr.converged;
        a = rr.a;
      } else if (!is_implicit(ispec.scheme)) {
        a = step_explicit(rom_rhs, a, dt_step, ispec.scheme);
      } else {
        StepResidual sr(ispec.scheme, dt_step, a, rom_rhs);
        memo->valid = false;
        NewtonResult nr;
        if (ispec.linear_solver == LinearSolver::DirectGauss) {
          nr = newton_direct(
              [&](const Eigen::VectorXd& yy) { return sr(yy); },
              [&](const Eigen::VectorXd& yy) { return sr.jac(yy, rom_jac); }, a,
              ispec.newton_tol, ispec.newton_max_iter);
        } else {
          nr = newton_jfnk(
              [&](const Eigen::VectorXd& yy) { return sr(yy); },
              [&](const Eigen::VectorXd& yy, const Eigen::VectorXd& vv) {
                return sr.jac_vec(yy, vv, rom_jv);
              },
              a, ispec.newton_tol, ispec.newton_max_iter, ispec.gmres_tol,
              ispec.gmres_max_iter > 0 ? ispec.gmres_max_iter
                                       : static_cast<int>(basis.k()));
        }
        traj.total_newton_iters += nr.iterations;
        traj.total_gmres_iters += nr.total_gmres_iters;
        traj.newton_iters_per_step.push_back(nr.iterations);
        traj.gmres_iters_per_step.push_back(static_cast<int>(nr.total_gmres_iters));
        traj.newton_ok = traj.newton_ok && nr.converged;
        a = nr.y;
      }
    } catch (const NonPhysicalState&) {
      traj.stable = false;
      break;
    } catch (const SingularJacobian&) {
      traj.stable = false;
      break;
    } catch (const ZeroSpectralRadius&) {
      traj.stable = false;
      break;
    }
    ++traj.steps;
    if (!a.allFinite() || a.cwiseAbs().maxCoeff() > ispec.blowup) {
      traj.stable = false;
      break;
    }
    if ((kstep + 1) % save.every == 0) {
      saved.push_back(a);
      times.push_back(t_next);
    }
  }
  const auto t_end = std::chrono::steady_clock::now();
  traj.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();

  traj.times = std::move(times);
  traj.states.resize(basis.k(), static_cast<Eigen::Index>(saved.size()));
  for (std::size_t i = 0; i < saved.size(); ++i)
    traj.states.col(static_cast<Eigen::Index>(i)) = saved[i];
  out.all_steps_converged = traj.newton_ok;
  out.traj = std::move(traj);
  return out;
}

}  // namespace romkit
