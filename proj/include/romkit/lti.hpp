#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <cstdint>

#include "romkit/fom.hpp"

namespace romkit {

// Linear time-invariant system du/dt = A u with the eigendecomposition cached
// at construction.  Self-adjoint matrices get the symmetric solver (real
// spectrum, orthonormal eigenvectors); anything else goes through the general
// complex decomposition.
class LtiSystem final : public FomSystem {
 public:
  explicit LtiSystem(Eigen::MatrixXd a);

  Eigen::Index dim() const override;
  void rhs(const Eigen::VectorXd& u, Eigen::VectorXd& out) const override;
  using FomSystem::rhs;
  void jac_vec(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
               Eigen::VectorXd& out) const override;
  using FomSystem::jac_vec;
  bool has_jac_dense() const override { return true; }
  Eigen::MatrixXd jac_dense(const Eigen::VectorXd& u) const override;

  void rhs_rows(const Eigen::VectorXd& u, const std::vector<int>& rows,
                Eigen::VectorXd& out) const override;
  using FomSystem::rhs_rows;

  const Eigen::MatrixXd& A() const { return a_; }
  bool is_self_adjoint() const { return self_adjoint_; }
  double spectral_norm() const { return spectral_norm_; }

  // Eigenvalues sorted descending by real part (ties by imaginary part);
  // eigvec column i pairs with eigenvalue i.
  const Eigen::VectorXcd& eigenvalues() const { return eigvals_; }
  const Eigen::MatrixXcd& eigenvectors() const { return eigvecs_; }

  // Real spectrum accessor; valid only when is_self_adjoint().
  Eigen::VectorXd real_eigenvalues() const;

  // u(t) = e^{At} u0 through the cached decomposition.
  Eigen::VectorXd evolve(const Eigen::VectorXd& u0, double t) const;

 private:
  Eigen::MatrixXd a_;
  bool self_adjoint_;
  double spectral_norm_;
  Eigen::VectorXcd eigvals_;
  Eigen::MatrixXcd eigvecs_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> eigvecs_lu_;
};

// Second-difference operator (1/dx²)·tridiag(1, −2, 1) with homogeneous
// Dirichlet closure; self-adjoint with spectrum (2cos(kπ/(n+1)) − 2)/dx².
LtiSystem make_diffusion_lti(int n, double dx);
Eigen::MatrixXd diffusion_matrix(int n, double dx);

// Random test matrices, deterministic in the seed.
Eigen::MatrixXd random_self_adjoint_neg_def(int n, std::uint64_t seed,
                                            double lam_min = 0.2,
                                            double lam_max = 5.0);
Eigen::MatrixXd random_stable_matrix(int n, std::uint64_t seed);

}  // namespace romkit
