#pragma once

#include <Eigen/Core>
#include <atomic>
#include <vector>

namespace romkit {

// Full-order dynamical system du/dt = R(u).  Implementations are immutable
// after construction; rhs and jac_vec may be called concurrently.  The only
// mutable state is a pair of atomic row counters, which exist so tests can
// prove that hyper-reduced evaluations never touch rows outside the declared
// stencil.
class FomSystem {
 public:
  virtual ~FomSystem() = default;
  FomSystem() = default;
  FomSystem(const FomSystem&) = delete;
  FomSystem& operator=(const FomSystem&) = delete;

  virtual Eigen::Index dim() const = 0;

  virtual void rhs(const Eigen::VectorXd& u, Eigen::VectorXd& out) const = 0;
  Eigen::VectorXd rhs(const Eigen::VectorXd& u) const;

  // J[u]·v.  Default implementation is a forward finite difference with
  // step fd_eps(); linear systems override with the exact product.
  virtual void jac_vec(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                       Eigen::VectorXd& out) const;
  Eigen::VectorXd jac_vec(const Eigen::VectorXd& u,
                          const Eigen::VectorXd& v) const;

  virtual bool has_jac_dense() const { return false; }
  virtual Eigen::MatrixXd jac_dense(const Eigen::VectorXd& u) const;

  virtual double fd_eps() const { return 1e-5; }

  // Sampled evaluation: out[k] = R(u)[rows[k]].  The input state only needs
  // valid entries at stencil_rows(rows).
  virtual void rhs_rows(const Eigen::VectorXd& u, const std::vector<int>& rows,
                        Eigen::VectorXd& out) const;
  Eigen::VectorXd rhs_rows(const Eigen::VectorXd& u,
                           const std::vector<int>& rows) const;

  // Every state row read when evaluating the RHS at the given rows, sorted
  // and unique.  Default assumes dense coupling: all rows.
  virtual std::vector<int> stencil_rows(const std::vector<int>& rows) const;

  // Grouping of state rows into mesh cells; sampling promotes whole cells so
  // every conserved variable of a selected cell is available.  Default: one
  // row per cell.
  virtual int n_cells() const;
  virtual int cell_of_row(int row) const;
  virtual std::vector<int> rows_of_cell(int cell) const;

  long long rows_evaluated() const;
  long long max_rows_per_eval() const;
  void reset_row_counters() const;

 protected:
  void count_rows(long long n) const;

 private:
  mutable std::atomic<long long> rows_evaluated_{0};
  mutable std::atomic<long long> max_rows_per_eval_{0};
};

// (R(u + eps·v) − R(u)) / eps.
Eigen::VectorXd jac_vec_fd(const FomSystem& sys, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v, double eps);

}  // namespace romkit
