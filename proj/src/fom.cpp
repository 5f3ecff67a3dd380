#include "romkit/fom.hpp"

#include <numeric>

#include "romkit/errors.hpp"

namespace romkit {

Eigen::VectorXd FomSystem::rhs(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(dim());
  rhs(u, out);
  return out;
}

void FomSystem::jac_vec(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        Eigen::VectorXd& out) const {
  out = jac_vec_fd(*this, u, v, fd_eps());
}

Eigen::VectorXd FomSystem::jac_vec(const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(dim());
  jac_vec(u, v, out);
  return out;
}

Eigen::MatrixXd FomSystem::jac_dense(const Eigen::VectorXd&) const {
  throw DenseJacobianUnavailable("system does not provide a dense Jacobian");
}

void FomSystem::rhs_rows(const Eigen::VectorXd& u, const std::vector<int>& rows,
                         Eigen::VectorXd& out) const {
  Eigen::VectorXd full(dim());
  rhs(u, full);
  out.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = full[rows[k]];
}

Eigen::VectorXd FomSystem::rhs_rows(const Eigen::VectorXd& u,
                                    const std::vector<int>& rows) const {
  Eigen::VectorXd out;
  rhs_rows(u, rows, out);
  return out;
}

std::vector<int> FomSystem::stencil_rows(const std::vector<int>&) const {
  std::vector<int> all(static_cast<std::size_t>(dim()));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

int FomSystem::n_cells() const { return static_cast<int>(dim()); }

int FomSystem::cell_of_row(int row) const { return row; }

std::vector<int> FomSystem::rows_of_cell(int cell) const { return {cell}; }

long long FomSystem::rows_evaluated() const { return rows_evaluated_.load(); }

long long FomSystem::max_rows_per_eval() const { return max_rows_per_eval_.load(); }

void FomSystem::reset_row_counters() const {
  rows_evaluated_.store(0);
  max_rows_per_eval_.store(0);
}

void FomSystem::count_rows(long long n) const {
  rows_evaluated_.fetch_add(n);
  long long prev = max_rows_per_eval_.load();
  while (n > prev && !max_rows_per_eval_.compare_exchange_weak(prev, n)) {
  }
}

Eigen::VectorXd jac_vec_fd(const FomSystem& sys, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v, double eps) {
  if (eps <= 0.0) throw InvalidArgument("jac_vec_fd: eps must be positive");
  Eigen::VectorXd r0(sys.dim()), r1(sys.dim());
  sys.rhs(u, r0);
  sys.rhs(u + eps * v, r1);
  return (r1 - r0) / eps;
}

}  // namespace romkit
