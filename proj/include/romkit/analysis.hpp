#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "romkit/basis.hpp"
#include "romkit/lti.hpp"
#include "romkit/timeint.hpp"

namespace romkit {

// Coarse-scale error history of a ROM run against the projected FOM.  Norms
// are taken in generalized coordinates, which equals the full-space norm of
// Ṽã − Π̃u because the basis is orthonormal.
struct ErrorSeries {
  std::vector<double> times;
  Eigen::VectorXd e_l2;
  double integrated = 0.0;  // left-Riemann sum of e_l2 over the saved times
};

ErrorSeries error_norm(const Trajectory& rom_traj, const Trajectory& fom_traj,
                       const TrialBasis& basis);

// τ-misfit optimization over a fixed grid.  Each run is scored by
// 𝒥(τ) = Σ ‖e(t_i)‖₂ over the saved times after t = 0; unstable runs
// (flagged by the integrator or any coordinate above 1e8) score infinity.
struct MisfitResult {
  double tau_opt = 0.0;
  int best_index = -1;
  std::vector<double> j_values;
  std::vector<bool> stable;
};

using RomFactory = std::function<Trajectory(double)>;

MisfitResult misfit_tau(const std::vector<double>& tau_grid,
                        const RomFactory& rom_factory,
                        const Trajectory& fom_ref, const TrialBasis& basis);

// FLOP cost model for one time step of each closure/integrator pairing.
// ω is the per-degree-of-freedom cost of a full RHS evaluation and η the
// GMRES iteration count of the matrix-free implicit variant.
struct CostModel {
  long long n = 0;
  long long k = 0;
  long long omega = 0;
  long long r = 0;
  long long np = 0;
  long long eta = 0;
};

enum class Algorithm {
  GalerkinExplicit,
  ApgExplicit,
  GalerkinImplicit,
  ApgImplicitDirect,
  ApgImplicitJfnk,
  Lspg,
};

long long flop_estimate(const CostModel& m, Algorithm alg);

// One verified inequality: pass means lhs ≤ rhs, margin is rhs − lhs.
struct CheckRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
};

CheckRow make_check(std::string name, double lhs, double rhs);
// Record-only row: never fails, rhs/margin reported as infinity.
CheckRow make_record(std::string name, double lhs);

struct Report {
  std::string title;
  std::vector<CheckRow> rows;

  bool all_pass() const;
  int n_failed() const;
  std::string summary() const;
  void to_csv(const std::string& path) const;
  void append(const Report& other, const std::string& prefix);
};

// Sample Pearson correlation coefficient.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Gauss–Legendre nodes and weights on [−1, 1], deterministic.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Coarse-scale error bounds for an LTI FOM: the exact error of the Galerkin
// and τ-closure ROMs must stay below the bound built from the
// eigendecomposition of the reduced operator and the projected full-order
// residual along the projected FOM trajectory,
//   ‖ẽ(t)‖ ≤ ‖S‖‖S⁻¹‖ ∫₀ᵗ ‖e^{Λ(t−s)}‖ ‖Ṽᵀℙ r_F(ũ_F(s))‖ ds.
// One row per method per grid time, slack factor 1 + 1e-6.
Report verify_lti_error_bound(const LtiSystem& sys, const TrialBasis& basis,
                              const Eigen::VectorXd& u0,
                              const std::vector<double>& t_grid, double tau);

// Eigenvalue ordering of the reduced operators for self-adjoint negative
// systems: the τ-closure spectrum dominates the Galerkin spectrum
// elementwise, and its largest eigenvalue stays nonpositive whenever
// τ ≤ |γ₁|/γ_N².  Larger τ are recorded without asserting the sign.  An
// empty grid defaults to {0, bound/2, bound}.
Report verify_eigen_ordering(const LtiSystem& sys, const TrialBasis& basis,
                             std::vector<double> tau_grid = {});

// Memory-integral split bounds on the projected residual at time t and the
// per-unit-τ comparison
//   δ̄(τ) = (‖I₀^τ − τṼᵀAΠ′Aũ_F(t)‖ − ‖I₀^τ‖)/τ,
// which must be negative for the two smallest τ of a decreasing grid.  The
// integrals of e^{Π′Aζ}Π′Aũ_F(t−ζ) use composite 64-node Gauss–Legendre
// panels with a doubling check.  An empty grid defaults to
// {1e-1, 1e-2, 1e-3, 1e-4}/ρ(A).
Report verify_residual_split(const LtiSystem& sys, const TrialBasis& basis,
                             const Eigen::VectorXd& u0, double t,
                             std::vector<double> tau_grid = {});

// Informational report: evaluates the Lipschitz-type full-error bound
//   ‖e(t)‖ ≤ ∫₀ᵗ e^{‖ℙ‖κs} ‖(I−ℙ)R(u_F(t−s))‖ ds
// for a caller-supplied κ.  The initial state is projected onto the basis so
// both trajectories start identically.  Rows are recorded with their
// pass/fail status but callers should treat them as diagnostics: the bound
// is only guaranteed when κ is a true Lipschitz constant of the RHS.
Report nonlinear_error_bound_report(const LtiSystem& sys,
                                    const TrialBasis& basis,
                                    const Eigen::VectorXd& u0,
                                    const std::vector<double>& t_grid,
                                    double tau, double kappa);

// Seeded batch of all three closure verifications on random self-adjoint
// negative-definite systems (dimension ≤ 32, basis size ≤ 8).
Report run_verification_suite(int n_cases, std::uint64_t seed);

}  // namespace romkit
