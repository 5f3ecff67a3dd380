#include "romkit/timeint.hpp"

#include <Eigen/LU>
#include <chrono>
#include <cmath>

#include "romkit/errors.hpp"

namespace romkit {

bool is_implicit(Scheme s) {
  return s == Scheme::ImplicitEuler || s == Scheme::CrankNicolson;
}

Eigen::VectorXd step_explicit(const RhsFn& rhs, const Eigen::VectorXd& y,
                              double dt, Scheme scheme) {
  if (!(dt > 0.0)) throw InvalidArgument("step_explicit: dt must be positive");
  switch (scheme) {
    case Scheme::ExplicitEuler:
      return y + dt * rhs(y);
    case Scheme::SspRk3: {
      const Eigen::VectorXd y1 = y + dt * rhs(y);
      const Eigen::VectorXd y2 = 0.75 * y + 0.25 * (y1 + dt * rhs(y1));
      return (1.0 / 3.0) * y + (2.0 / 3.0) * (y2 + dt * rhs(y2));
    }
    default:
      throw InvalidArgument("step_explicit: scheme is not explicit");
  }
}

StepResidual::StepResidual(Scheme scheme, double dt, Eigen::VectorXd y_prev,
                           RhsFn rhs)
    : scheme_(scheme), dt_(dt), y_prev_(std::move(y_prev)), rhs_(std::move(rhs)) {
  if (!is_implicit(scheme_))
    throw InvalidArgument("StepResidual: scheme is not implicit");
  if (!(dt_ > 0.0)) throw InvalidArgument("StepResidual: dt must be positive");
  weight_ = scheme_ == Scheme::ImplicitEuler ? 1.0 : 0.5;
  if (scheme_ == Scheme::CrankNicolson) r_prev_ = rhs_(y_prev_);
}

Eigen::VectorXd StepResidual::operator()(const Eigen::VectorXd& y) const {
  Eigen::VectorXd r = (y - y_prev_) / dt_ - weight_ * rhs_(y);
  if (scheme_ == Scheme::CrankNicolson) r -= weight_ * r_prev_;
  return r;
}

Eigen::MatrixXd StepResidual::jac(const Eigen::VectorXd& y,
                                  const JacFn& rhs_jac) const {
  Eigen::MatrixXd j = -weight_ * rhs_jac(y);
  j.diagonal().array() += 1.0 / dt_;
  return j;
}

Eigen::VectorXd StepResidual::jac_vec(const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& v,
                                      const JacVecFn& rhs_jac_vec) const {
  return v / dt_ - weight_ * rhs_jac_vec(y, v);
}

NewtonResult newton_direct(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& res,
    const JacFn& jac, const Eigen::VectorXd& y0, double tol, int max_iter) {
  NewtonResult out;
  out.y = y0;
  Eigen::VectorXd r = res(out.y);
  out.residual_norm = r.cwiseAbs().maxCoeff();
  out.history.push_back(out.residual_norm);
  for (int it = 0; it < max_iter; ++it) {
    if (out.residual_norm <= tol) {
      out.converged = true;
      return out;
    }
    const Eigen::MatrixXd j = jac(out.y);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
    const double j_max = j.cwiseAbs().maxCoeff();
    const double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (pivot_min < 1e-14 * j_max)
      throw SingularJacobian("newton_direct: pivot " + std::to_string(pivot_min) +
                             " below 1e-14·" + std::to_string(j_max));
    out.y += lu.solve(-r);
    ++out.iterations;
    r = res(out.y);
    out.residual_norm = r.cwiseAbs().maxCoeff();
    out.history.push_back(out.residual_norm);
  }
  out.converged = out.residual_norm <= tol;
  return out;
}

GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                  const Eigen::VectorXd& b, double tol, int max_iter) {
  const Eigen::Index n = b.size();
  GmresResult out;
  out.x = Eigen::VectorXd::Zero(n);
  const double beta = b.norm();
  if (beta == 0.0) {
    out.converged = true;
    return out;
  }
  const int m = std::min<int>(max_iter, static_cast<int>(n));
  std::vector<Eigen::VectorXd> v;
  v.reserve(static_cast<std::size_t>(m) + 1);
  v.push_back(b / beta);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
  g[0] = beta;
  Eigen::VectorXd cs(m), sn(m);

  int j = 0;
  for (; j < m; ++j) {
    Eigen::VectorXd w = op(v[static_cast<std::size_t>(j)]);
    for (int i = 0; i <= j; ++i) {
      h(i, j) = v[static_cast<std::size_t>(i)].dot(w);
      w -= h(i, j) * v[static_cast<std::size_t>(i)];
    }
    h(j + 1, j) = w.norm();
    const bool lucky = h(j + 1, j) < 1e-14;
    if (!lucky) v.push_back(w / h(j + 1, j));

    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
      h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
      h(i, j) = t;
    }
    const double denom = std::hypot(h(j, j), h(j + 1, j));
    if (denom == 0.0) {
      cs[j] = 1.0;
      sn[j] = 0.0;
    } else {
      cs[j] = h(j, j) / denom;
      sn[j] = h(j + 1, j) / denom;
    }
    h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
    h(j + 1, j) = 0.0;
    g[j + 1] = -sn[j] * g[j];
    g[j] = cs[j] * g[j];

    ++out.iterations;
    const double res = std::abs(g[j + 1]);
    if (lucky) {
      out.breakdown = true;
      out.converged = true;
      ++j;
      break;
    }
    if (res <= tol * beta) {
      out.converged = true;
      ++j;
      break;
    }
  }

  const int used = std::min(j, static_cast<int>(v.size()));
  if (used == 0) return out;
  Eigen::VectorXd y(used);
  for (int i = used - 1; i >= 0; --i) {
    double s = g[i];
    for (int l = i + 1; l < used; ++l) s -= h(i, l) * y[l];
    y[i] = s / h(i, i);
  }
  for (int i = 0; i < used; ++i) out.x += y[i] * v[static_cast<std::size_t>(i)];
  out.rel_residual = std::abs(g[used]) / beta;
  return out;
}

NewtonResult newton_jfnk(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& res,
    const JacVecFn& jac_vec_op, const Eigen::VectorXd& y0, double tol,
    int max_iter, double gmres_tol, int gmres_max_iter) {
  NewtonResult out;
  out.y = y0;
  Eigen::VectorXd r = res(out.y);
  out.residual_norm = r.cwiseAbs().maxCoeff();
  out.history.push_back(out.residual_norm);
  const int m = gmres_max_iter > 0 ? gmres_max_iter : static_cast<int>(y0.size());
  for (int it = 0; it < max_iter; ++it) {
    if (out.residual_norm <= tol) {
      out.converged = true;
      return out;
    }
    const Eigen::VectorXd y_at = out.y;
    auto op = [&](const Eigen::VectorXd& vv) { return jac_vec_op(y_at, vv); };
    const GmresResult lin = gmres(op, -r, gmres_tol, m);
    out.total_gmres_iters += lin.iterations;
    out.y += lin.x;
    ++out.iterations;
    r = res(out.y);
    out.residual_norm = r.cwiseAbs().maxCoeff();
    out.history.push_back(out.residual_norm);
  }
  out.converged = out.residual_norm <= tol;
  return out;
}

Eigen::MatrixXd fd_jacobian(const RhsFn& rhs, const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  const Eigen::VectorXd r0 = rhs(y);
  Eigen::MatrixXd j(r0.size(), n);
  Eigen::VectorXd yp = y;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double h = 1e-7 * (1.0 + std::abs(y[c]));
    yp[c] = y[c] + h;
    j.col(c) = (rhs(yp) - r0) / h;
    yp[c] = y[c];
  }
  return j;
}

Trajectory integrate(const OdeSystem& sys, const Eigen::VectorXd& y0,
                     const IntegratorSpec& spec, const SaveSpec& save) {
  if (!(spec.dt > 0.0)) throw InvalidArgument("integrate: dt must be positive");
  if (!(spec.t_final > 0.0)) throw InvalidArgument("integrate: t_final must be positive");
  if (save.every < 1) throw InvalidArgument("integrate: save.every must be >= 1");

  const double ratio = spec.t_final / spec.dt;
  const long long n_steps =
      std::max<long long>(1, static_cast<long long>(
                                 std::ceil(ratio - 1e-12 * std::max(1.0, ratio))));

  Trajectory traj;
  const Eigen::Index dim = y0.size();
  std::vector<Eigen::VectorXd> saved;
  std::vector<double> times;
  if (save.include_initial) {
    saved.push_back(y0);
    times.push_back(0.0);
  }

  const JacFn jac_eff = sys.jac ? sys.jac : JacFn([rhs = sys.rhs](const Eigen::VectorXd& y) {
    return fd_jacobian(rhs, y);
  });
  const JacVecFn jv_eff =
      sys.jac_vec ? sys.jac_vec
                  : JacVecFn([rhs = sys.rhs](const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& v) -> Eigen::VectorXd {
                      const double eps = 1e-5;
                      // Materialize here: a deduced return type would hand the
                      // caller a lazy expression over temporaries that die at
                      // the closing brace.
                      return ((rhs(y + eps * v) - rhs(y)) / eps).eval();
                    });

  Eigen::VectorXd y = y0;
  const auto t_start = std::chrono::steady_clock::now();
  for (long long k = 0; k < n_steps; ++k) {
    const double t_next = (k + 1 == n_steps) ? spec.t_final : spec.dt * double(k + 1);
    const double dt_step = t_next - spec.dt * double(k);
    try {
      if (!is_implicit(spec.scheme)) {
        y = step_explicit(sys.rhs, y, dt_step, spec.scheme);
      } else {
        StepResidual sr(spec.scheme, dt_step, y, sys.rhs);
        NewtonResult nr;
        if (spec.linear_solver == LinearSolver::DirectGauss) {
          nr = newton_direct(
              [&](const Eigen::VectorXd& yy) { return sr(yy); },
              [&](const Eigen::VectorXd& yy) { return sr.jac(yy, jac_eff); }, y,
              spec.newton_tol, spec.newton_max_iter);
        } else {
          nr = newton_jfnk(
              [&](const Eigen::VectorXd& yy) { return sr(yy); },
              [&](const Eigen::VectorXd& yy, const Eigen::VectorXd& vv) {
                return sr.jac_vec(yy, vv, jv_eff);
              },
              y, spec.newton_tol, spec.newton_max_iter, spec.gmres_tol,
              spec.gmres_max_iter > 0 ? spec.gmres_max_iter : static_cast<int>(dim));
        }
        traj.total_newton_iters += nr.iterations;
        traj.total_gmres_iters += nr.total_gmres_iters;
        traj.newton_iters_per_step.push_back(nr.iterations);
        traj.gmres_iters_per_step.push_back(static_cast<int>(nr.total_gmres_iters));
        traj.newton_ok = traj.newton_ok && nr.converged;
        y = nr.y;
      }
    } catch (const NonPhysicalState&) {
      traj.stable = false;
      break;
    } catch (const SingularJacobian&) {
      traj.stable = false;
      break;
    }
    ++traj.steps;
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > spec.blowup) {
      traj.stable = false;
      break;
    }
    if ((k + 1) % save.every == 0) {
      saved.push_back(y);
      times.push_back(t_next);
    }
  }
  const auto t_end = std::chrono::steady_clock::now();
  traj.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();

  traj.times = std::move(times);
  traj.states.resize(dim, static_cast<Eigen::Index>(saved.size()));
  for (std::size_t i = 0; i < saved.size(); ++i)
    traj.states.col(static_cast<Eigen::Index>(i)) = saved[i];
  return traj;
}

}  // namespace romkit
