#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "romkit/basis.hpp"
#include "romkit/fom.hpp"
#include "romkit/timeint.hpp"

namespace romkit {

enum class JacMode { FiniteDiff, Exact };

// ã̇ = Ṽᵀ R(Ṽ ã).
Eigen::VectorXd galerkin_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                             const TrialBasis& basis);

// ã̇ = Ṽᵀ[R(ũ) + τ·J[ũ]·Π′R(ũ)] with ũ = Ṽ ã.  The Jacobian action is a
// forward difference reusing the already computed R(ũ), or the dense Jacobian
// when jac_mode is Exact.
Eigen::VectorXd apg_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                        const TrialBasis& basis, double tau,
                        JacMode jac_mode = JacMode::FiniteDiff, double eps = 1e-5);

// Same closure assembled through the test basis W = (I + τ·Π′ᵀJᵀ[ũ])Ṽ, i.e.
// WᵀR(ũ).  Needs the dense Jacobian; serves as the algebraic cross-check of
// apg_rhs.
Eigen::VectorXd apg_test_basis_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                                   const TrialBasis& basis, double tau);

struct LspgConfig {
  int max_iter = 50;
  double grad_tol = 1e-8;       // on ‖Wᵀr‖_∞
  double rel_cost_tol = 1e-8;
  double jac_eps = 1e-5;
  JacMode jac_mode = JacMode::FiniteDiff;
  int max_backtracks = 30;
};

struct LspgResult {
  Eigen::VectorXd a;
  bool converged = false;
  int iterations = 0;
  double cost = 0.0;       // ‖r‖₂² at exit
  double grad_norm = 0.0;  // ‖Wᵀr‖_∞ at exit
};

// One implicit step of least-squares Petrov–Galerkin: minimize the fully
// discrete residual ‖r(Ṽa; Ṽa_prev)‖₂² over a by Gauss–Newton with
// backtracking.  Never throws on slow convergence; the result carries the
// best iterate and a converged flag.
LspgResult lspg_step(const Eigen::VectorXd& a_prev, const FomSystem& sys,
                     const TrialBasis& basis, double dt, Scheme scheme,
                     const LspgConfig& cfg = {});

namespace detail {
// Shared Gauss–Newton core; when rows is non-null the residual is collocated
// on those rows and the reconstruction only fills the stencil closure.
LspgResult lspg_core(const Eigen::VectorXd& a_prev, const FomSystem& sys,
                     const TrialBasis& basis, const std::vector<int>* rows,
                     double dt, Scheme scheme, const LspgConfig& cfg);
}  // namespace detail

// τ = C / ρ(Ṽᵀ J[Ṽa] Ṽ) with the spectral radius from power iteration on the
// K×K coarse Jacobian (200 iterations or relative change below 1e-8; a
// non-converged run returns the geometric-mean growth over the second half,
// which handles complex dominant pairs).
double tau_heuristic(const Eigen::VectorXd& a, const FomSystem& sys,
                     const TrialBasis& basis, double c);

struct RomMethod {
  enum class Kind { Galerkin, Apg, Lspg };
  Kind kind = Kind::Galerkin;
  double tau = 0.0;
  bool tau_auto = false;      // τ from the heuristic at t = 0
  bool tau_per_step = false;  // re-evaluate the heuristic before every step
  double tau_c = 0.2;
  JacMode jac_mode = JacMode::FiniteDiff;
  double fd_eps = 1e-5;
  // Perturbation for Jacobian-vector products taken of an RHS that itself
  // contains a finite difference; enlarged to avoid compounding truncation.
  double jfnk_eps = 1e-4;

  static RomMethod galerkin();
  static RomMethod apg(double tau, JacMode mode = JacMode::FiniteDiff,
                       double eps = 1e-5);
  static RomMethod apg_auto(double c = 0.2, JacMode mode = JacMode::FiniteDiff);
  static RomMethod lspg();
};

struct RomRunResult {
  Trajectory traj;  // K × n_saved generalized coordinates
  double tau = 0.0;
  bool all_steps_converged = true;
};

// March the chosen closure from ã₀.  Galerkin and APG integrate through the
// requested scheme (explicit stepping, or Newton on the fully discrete
// residual with a direct or JFNK linear solve); LSPG performs its
// Gauss–Newton minimization every step and requires an implicit scheme.
RomRunResult run_rom(const FomSystem& sys, const TrialBasis& basis,
                     const Eigen::VectorXd& a0, const RomMethod& method,
                     const IntegratorSpec& ispec, const SaveSpec& save = {});

}  // namespace romkit
