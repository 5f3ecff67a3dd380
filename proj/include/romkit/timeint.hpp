#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace romkit {

enum class Scheme { ExplicitEuler, SspRk3, ImplicitEuler, CrankNicolson };
enum class LinearSolver { DirectGauss, JfnkGmres };

bool is_implicit(Scheme s);

using RhsFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using JacVecFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct IntegratorSpec {
  Scheme scheme = Scheme::ExplicitEuler;
  double dt = 1e-3;
  double t_final = 1.0;
  double newton_tol = 1e-9;
  int newton_max_iter = 25;
  LinearSolver linear_solver = LinearSolver::DirectGauss;
  double gmres_tol = 1e-10;
  int gmres_max_iter = 0;  // 0 means the system dimension
  // A state whose max-norm crosses this marks the trajectory unstable.
  double blowup = 1e8;
};

// One explicit step: forward Euler, or the three-stage strong
// stability-preserving RK3 convex combination.
Eigen::VectorXd step_explicit(const RhsFn& rhs, const Eigen::VectorXd& y,
                              double dt, Scheme scheme);

// Fully discrete one-step residual r(y; y_prev).  Implicit Euler:
// (y − y_prev)/Δt − R(y).  Crank–Nicolson: (y − y_prev)/Δt − ½(R(y) + R(y_prev)),
// with R(y_prev) cached at construction.
class StepResidual {
 public:
  StepResidual(Scheme scheme, double dt, Eigen::VectorXd y_prev, RhsFn rhs);

  Eigen::VectorXd operator()(const Eigen::VectorXd& y) const;
  // ∂r/∂y assembled from the RHS Jacobian: I/Δt − c·J with c the implicit
  // weight (1 for implicit Euler, ½ for Crank–Nicolson).
  Eigen::MatrixXd jac(const Eigen::VectorXd& y, const JacFn& rhs_jac) const;
  // (∂r/∂y)·v from a Jacobian-vector product of the RHS.
  Eigen::VectorXd jac_vec(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                          const JacVecFn& rhs_jac_vec) const;

  Scheme scheme() const { return scheme_; }
  double dt() const { return dt_; }
  double implicit_weight() const { return weight_; }
  const Eigen::VectorXd& y_prev() const { return y_prev_; }

 private:
  Scheme scheme_;
  double dt_;
  double weight_;
  Eigen::VectorXd y_prev_;
  RhsFn rhs_;
  Eigen::VectorXd r_prev_;
};

struct NewtonResult {
  Eigen::VectorXd y;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;         // max-norm at exit
  std::vector<double> history;        // max-norm per iterate, starting at y0
  long long total_gmres_iters = 0;
};

// Newton with a dense LU solve per iteration.
NewtonResult newton_direct(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& res,
                           const JacFn& jac, const Eigen::VectorXd& y0,
                           double tol, int max_iter);

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  bool breakdown = false;  // Arnoldi norm below 1e-14: converged in subspace
};

// Unrestarted GMRES with modified Gram–Schmidt Arnoldi.
GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                  const Eigen::VectorXd& b, double tol, int max_iter);

// Jacobian-free Newton–Krylov: each Newton step solves J Δ = −r by GMRES
// using only Jacobian-vector products.
NewtonResult newton_jfnk(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& res,
                         const JacVecFn& jac_vec_op, const Eigen::VectorXd& y0,
                         double tol, int max_iter, double gmres_tol,
                         int gmres_max_iter);

struct OdeSystem {
  Eigen::Index dim = 0;
  RhsFn rhs;
  JacFn jac;          // optional; finite difference of rhs when absent
  JacVecFn jac_vec;   // optional; finite difference of rhs when absent
};

struct SaveSpec {
  int every = 1;
  bool include_initial = true;
};

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // dim × n_saved
  bool stable = true;
  bool newton_ok = true;
  long long steps = 0;
  long long total_newton_iters = 0;
  long long total_gmres_iters = 0;
  std::vector<int> newton_iters_per_step;
  std::vector<int> gmres_iters_per_step;
  double wall_seconds = 0.0;  // time loop only
};

// March y' = R(y) from t = 0 to t_final; ceil(t_final/dt) steps with the last
// one truncated to land on t_final.  States are recorded after every
// `save.every`-th step.
Trajectory integrate(const OdeSystem& sys, const Eigen::VectorXd& y0,
                     const IntegratorSpec& spec, const SaveSpec& save = {});

// Dense ∂R/∂y by column-wise forward differences with per-column step
// h_j = 1e-7·(1 + |y_j|).
Eigen::MatrixXd fd_jacobian(const RhsFn& rhs, const Eigen::VectorXd& y);

}  // namespace romkit
