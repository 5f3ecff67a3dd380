#include "romkit/hyper.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <set>
#include <utility>

#include "romkit/errors.hpp"

namespace romkit {

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void check_indices(const std::vector<int>& idx, int n, const char* what) {
  for (int i : idx) {
    if (i < 0 || i >= n) {
      throw InvalidArgument(std::string(what) + " index out of range");
    }
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m,
                            const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

std::vector<int> qr_sample(const Eigen::MatrixXd& u, int target_np,
                           const CellMapFn& cell_map) {
  const int n = static_cast<int>(u.rows());
  const int r = static_cast<int>(u.cols());
  if (n == 0 || r == 0) throw InvalidArgument("qr_sample: empty basis");
  if (target_np < r) {
    throw InvalidArgument("qr_sample: target_np must be at least r");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(u.transpose());
  const auto& piv = qr.colsPermutation().indices();

  std::set<int> chosen;
  int taken = 0;
  for (int k = 0; k < piv.size(); ++k) {
    const int row = static_cast<int>(piv(k));
    for (int g : cell_map(row)) chosen.insert(g);
    ++taken;
    if (taken >= r && static_cast<int>(chosen.size()) >= target_np) break;
  }
  return std::vector<int>(chosen.begin(), chosen.end());
}

std::vector<int> qr_sample(const Eigen::MatrixXd& u, int target_np,
                           const FomSystem& sys) {
  return qr_sample(u, target_np, [&sys](int row) {
    return sys.rows_of_cell(sys.cell_of_row(row));
  });
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0) throw InvalidArgument("pseudo_inverse: empty matrix");
  const double cutoff = 1e-12 * s(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

HyperData finalize_hyper(Eigen::MatrixXd u, Eigen::VectorXd sigma,
                         std::vector<int> sample_indices, const FomSystem& sys,
                         const TrialBasis& basis) {
  const int n = static_cast<int>(u.rows());
  const int r = static_cast<int>(u.cols());
  if (n != static_cast<int>(basis.n())) {
    throw DimensionMismatch("finalize_hyper: basis and RHS basis row counts differ");
  }
  if (n != static_cast<int>(sys.dim())) {
    throw DimensionMismatch("finalize_hyper: system dimension mismatch");
  }
  sample_indices = sorted_unique(std::move(sample_indices));
  check_indices(sample_indices, n, "sample");
  if (static_cast<int>(sample_indices.size()) < r) {
    throw RankDeficientSampling(
        "finalize_hyper: fewer sample rows than RHS modes");
  }

  HyperData h;
  h.stencil_indices = sorted_unique(sys.stencil_rows(sample_indices));
  check_indices(h.stencil_indices, n, "stencil");
  {
    std::set<int> st(h.stencil_indices.begin(), h.stencil_indices.end());
    for (int i : sample_indices) {
      if (!st.count(i)) {
        throw InvalidArgument("finalize_hyper: stencil must contain samples");
      }
    }
  }

  const Eigen::MatrixXd pu = gather_rows(u, sample_indices);
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(pu);
    const Eigen::VectorXd& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > 1e-12 * s(0)) ++rank;
    }
    if (rank < r) {
      throw RankDeficientSampling("finalize_hyper: PᵀU is column rank deficient");
    }
  }

  h.pinv = pseudo_inverse(pu);
  h.proj_precomp = Eigen::MatrixXd(basis.k(), r);
  for (int j = 0; j < r; ++j) {
    h.proj_precomp.col(j) = basis.apply_t(u.col(j));
  }
  h.stencil_u = gather_rows(u, h.stencil_indices);
  h.stencil_v = basis.restrict_rows(h.stencil_indices);
  h.u = std::move(u);
  h.sigma = std::move(sigma);
  h.sample_indices = std::move(sample_indices);
  return h;
}

HyperData gappy_offline(const Eigen::MatrixXd& rhs_snapshots, int r,
                        int target_np, const FomSystem& sys,
                        const TrialBasis& basis) {
  if (r <= 0) throw InvalidArgument("gappy_offline: r must be positive");
  auto [modes, sig] = pod_build(rhs_snapshots);
  if (r > static_cast<int>(modes.cols())) {
    throw RankDeficientSampling(
        "gappy_offline: requested more modes than the snapshot rank");
  }
  Eigen::MatrixXd u = modes.leftCols(r);
  Eigen::VectorXd sigma = sig.head(r);
  std::vector<int> samples = qr_sample(u, target_np, sys);
  return finalize_hyper(std::move(u), std::move(sigma), std::move(samples),
                        sys, basis);
}

Eigen::VectorXd gappy_coords(const HyperData& h,
                             const Eigen::VectorXd& sampled_values) {
  if (sampled_values.size() != h.np()) {
    throw DimensionMismatch("gappy_coords: expected one value per sample row");
  }
  return h.pinv * sampled_values;
}

Eigen::VectorXd gappy_reconstruct(const HyperData& h,
                                  const Eigen::VectorXd& coords) {
  if (coords.size() != h.rank()) {
    throw DimensionMismatch("gappy_reconstruct: coordinate size mismatch");
  }
  return h.u * coords;
}

Eigen::VectorXd hyper_apg_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                              const TrialBasis& basis, const HyperData& hyper,
                              double tau, double eps) {
  if (a.size() != basis.k()) {
    throw DimensionMismatch("hyper_apg_rhs: coordinate size mismatch");
  }
  if (tau < 0.0) throw InvalidArgument("hyper_apg_rhs: tau must be >= 0");
  if (eps <= 0.0) throw InvalidArgument("hyper_apg_rhs: eps must be positive");

  const Eigen::VectorXd u_stencil = hyper.stencil_v * a;
  Eigen::VectorXd u_work = Eigen::VectorXd::Zero(sys.dim());
  for (int i = 0; i < hyper.ns(); ++i) {
    u_work(hyper.stencil_indices[i]) = u_stencil(i);
  }

  const Eigen::VectorXd r_sample = sys.rhs_rows(u_work, hyper.sample_indices);
  const Eigen::VectorXd a_r = hyper.pinv * r_sample;
  if (tau == 0.0) return hyper.proj_precomp * a_r;

  // Orthogonal complement of the reconstructed RHS, restricted to the
  // stencil: P_sᵀ(I − ṼṼᵀ)U a_R.
  const Eigen::VectorXd rbar_stencil =
      hyper.stencil_u * a_r - hyper.stencil_v * (hyper.proj_precomp * a_r);

  for (int i = 0; i < hyper.ns(); ++i) {
    u_work(hyper.stencil_indices[i]) += eps * rbar_stencil(i);
  }
  const Eigen::VectorXd r_pert = sys.rhs_rows(u_work, hyper.sample_indices);
  const Eigen::VectorXd a_j = hyper.pinv * ((r_pert - r_sample) / eps);
  return hyper.proj_precomp * (a_r + tau * a_j);
}

LspgResult collocated_lspg_step(const Eigen::VectorXd& a_prev,
                                const FomSystem& sys, const TrialBasis& basis,
                                const std::vector<int>& sample_indices,
                                double dt, Scheme scheme,
                                const LspgConfig& cfg) {
  const std::vector<int> rows = sorted_unique(sample_indices);
  check_indices(rows, static_cast<int>(basis.n()), "sample");
  return detail::lspg_core(a_prev, sys, basis, &rows, dt, scheme, cfg);
}

}  // namespace romkit
