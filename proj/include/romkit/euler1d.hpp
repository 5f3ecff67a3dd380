#pragma once

#include <Eigen/Core>

#include "romkit/fom.hpp"

namespace romkit {

struct PrimState {
  double rho;
  double u;
  double p;
};

struct Euler1dConfig {
  int n_cells = 1000;
  double x_min = 0.0;
  double x_max = 1.0;
  double gamma = 1.4;
  PrimState left{1.0, 0.0, 1.0};
  PrimState right{0.125, 0.0, 0.1};
  double split_x = 0.5;
  // Harten-style smoothing of the acoustic eigenvalues.  Off by default;
  // expansion-shock artifacts at this resolution are accepted.
  bool entropy_fix = false;
  double entropy_fix_delta = 0.1;
  bool parallel = true;
};

Eigen::Vector3d conserved_from_primitive(const PrimState& w, double gamma);

// Analytic flux F(w) = (ρu, ρu² + p, u(ρE + p)) of one conserved state.
Eigen::Vector3d euler_flux(const Eigen::Vector3d& w, double gamma);

// First-order Roe interface flux between two conserved states.
Eigen::Vector3d roe_flux(const Eigen::Vector3d& wl, const Eigen::Vector3d& wr,
                         double gamma, bool entropy_fix = false,
                         double entropy_fix_delta = 0.1);

// Finite-volume RHS −(F_{i+1/2} − F_{i−1/2})/Δx on a uniform grid with
// mirrored ghost states at both walls (normal velocity negated).  State
// layout is variable-major: [all ρ | all ρu | all ρE].
void euler1d_rhs(const Eigen::VectorXd& state, const Euler1dConfig& cfg,
                 Eigen::VectorXd& out);

class Euler1d final : public FomSystem {
 public:
  explicit Euler1d(Euler1dConfig cfg);

  Eigen::Index dim() const override;
  void rhs(const Eigen::VectorXd& u, Eigen::VectorXd& out) const override;
  using FomSystem::rhs;

  // Dense Jacobian by column-wise finite differences; intended for small
  // verification grids, cost scales as dim² RHS work.
  bool has_jac_dense() const override { return true; }
  Eigen::MatrixXd jac_dense(const Eigen::VectorXd& u) const override;

  void rhs_rows(const Eigen::VectorXd& u, const std::vector<int>& rows,
                Eigen::VectorXd& out) const override;
  using FomSystem::rhs_rows;
  std::vector<int> stencil_rows(const std::vector<int>& rows) const override;
  int n_cells() const override;
  int cell_of_row(int row) const override;
  std::vector<int> rows_of_cell(int cell) const override;

  const Euler1dConfig& config() const { return cfg_; }
  double dx() const { return dx_; }
  Eigen::VectorXd initial_condition() const;

 private:
  Euler1dConfig cfg_;
  double dx_;
};

}  // namespace romkit
