#include "romkit/lti.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "romkit/errors.hpp"
#include "romkit/rng.hpp"

namespace romkit {

LtiSystem::LtiSystem(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0)
    throw DimensionMismatch("LtiSystem: matrix must be square and nonempty");
  const double a_max = a_.cwiseAbs().maxCoeff();
  self_adjoint_ = (a_ - a_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * a_max;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a_);
  spectral_norm_ = svd.singularValues()(0);

  const Eigen::Index n = a_.rows();
  if (self_adjoint_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_);
    if (es.info() != Eigen::Success)
      throw SolverFailure("LtiSystem: symmetric eigensolver failed");
    eigvals_.resize(n);
    eigvecs_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      eigvals_[i] = es.eigenvalues()[n - 1 - i];
      eigvecs_.col(i) = es.eigenvectors().col(n - 1 - i).cast<std::complex<double>>();
    }
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a_);
    if (es.info() != Eigen::Success)
      throw SolverFailure("LtiSystem: eigensolver failed");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& vals = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      if (vals[i].real() != vals[j].real()) return vals[i].real() > vals[j].real();
      return vals[i].imag() > vals[j].imag();
    });
    eigvals_.resize(n);
    eigvecs_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      eigvals_[i] = vals[order[static_cast<std::size_t>(i)]];
      eigvecs_.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double res =
        (a_.cast<std::complex<double>>() * eigvecs_.col(i) - eigvals_[i] * eigvecs_.col(i))
            .norm();
    if (res > 1e-8 * spectral_norm_)
      throw NonDiagonalizable("LtiSystem: eigenpair " + std::to_string(i) +
                              " residual " + std::to_string(res) +
                              " exceeds 1e-8·|A|");
  }

  eigvecs_lu_.compute(eigvecs_);
  const Eigen::VectorXcd probe = eigvecs_lu_.solve(Eigen::VectorXcd::Ones(n));
  if (!probe.allFinite() || (eigvecs_ * probe - Eigen::VectorXcd::Ones(n)).norm() > 1e-6 * std::sqrt(double(n)))
    throw NonDiagonalizable("LtiSystem: eigenvector matrix is numerically singular");
}

Eigen::Index LtiSystem::dim() const { return a_.rows(); }

void LtiSystem::rhs(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
  if (u.size() != a_.rows())
    throw DimensionMismatch("LtiSystem::rhs: state length mismatch");
  out = a_ * u;
  count_rows(dim());
}

void LtiSystem::jac_vec(const Eigen::VectorXd&, const Eigen::VectorXd& v,
                        Eigen::VectorXd& out) const {
  if (v.size() != a_.rows())
    throw DimensionMismatch("LtiSystem::jac_vec: vector length mismatch");
  out = a_ * v;
}

Eigen::MatrixXd LtiSystem::jac_dense(const Eigen::VectorXd&) const { return a_; }

void LtiSystem::rhs_rows(const Eigen::VectorXd& u, const std::vector<int>& rows,
                         Eigen::VectorXd& out) const {
  out.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = a_.row(rows[k]).dot(u);
  count_rows(static_cast<long long>(rows.size()));
}

Eigen::VectorXd LtiSystem::real_eigenvalues() const {
  if (!self_adjoint_)
    throw InvalidArgument("LtiSystem: real spectrum requires a self-adjoint matrix");
  return eigvals_.real();
}

Eigen::VectorXd LtiSystem::evolve(const Eigen::VectorXd& u0, double t) const {
  if (u0.size() != a_.rows())
    throw DimensionMismatch("LtiSystem::evolve: state length mismatch");
  if (self_adjoint_) {
    const Eigen::MatrixXd q = eigvecs_.real();
    Eigen::VectorXd z = q.transpose() * u0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      z[i] *= std::exp(eigvals_[i].real() * t);
    return q * z;
  }
  Eigen::VectorXcd z = eigvecs_lu_.solve(u0.cast<std::complex<double>>());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z[i] *= std::exp(eigvals_[i] * t);
  return (eigvecs_ * z).real();
}

Eigen::MatrixXd diffusion_matrix(int n, double dx) {
  if (n < 2) throw InvalidArgument("diffusion_matrix: n must be at least 2");
  if (!(dx > 0.0)) throw InvalidArgument("diffusion_matrix: dx must be positive");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const double s = 1.0 / (dx * dx);
  for (int i = 0; i < n; ++i) {
    a(i, i) = -2.0 * s;
    if (i > 0) a(i, i - 1) = s;
    if (i + 1 < n) a(i, i + 1) = s;
  }
  return a;
}

LtiSystem make_diffusion_lti(int n, double dx) {
  return LtiSystem(diffusion_matrix(n, dx));
}

Eigen::MatrixXd random_self_adjoint_neg_def(int n, std::uint64_t seed,
                                            double lam_min, double lam_max) {
  if (n < 1) throw InvalidArgument("random_self_adjoint_neg_def: n must be positive");
  Rng rng(seed);
  const Eigen::MatrixXd g = rng.normal_matrix(n, n);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd lam(n);
  for (int i = 0; i < n; ++i) lam[i] = -rng.uniform(lam_min, lam_max);
  Eigen::MatrixXd a = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd random_stable_matrix(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("random_stable_matrix: n must be positive");
  Rng rng(seed);
  Eigen::MatrixXd m = rng.normal_matrix(n, n) / std::sqrt(double(n));
  const double shift = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues()(0) + 0.1;
  m.diagonal().array() -= shift;
  return m;
}

}  // namespace romkit
