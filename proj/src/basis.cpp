#include "romkit/basis.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "romkit/errors.hpp"
#include "romkit/kernels.hpp"

namespace romkit {

namespace {

void check_orthonormal(const Eigen::MatrixXd& v, const std::string& what) {
  const Eigen::MatrixXd gram = v.transpose() * v;
  const double dev =
      (gram - Eigen::MatrixXd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10)
    throw NonOrthonormalBlock(what + ": columns deviate from orthonormality by " +
                              std::to_string(dev));
}

}  // namespace

TrialBasis::TrialBasis(Eigen::MatrixXd v, Eigen::VectorXd sigma)
    : n_(v.rows()), k_(v.cols()), v_(std::move(v)), sigma_(std::move(sigma)) {
  if (n_ == 0 || k_ == 0) throw InvalidArgument("TrialBasis: empty basis");
  if (k_ > n_) throw DimensionMismatch("TrialBasis: more columns than rows");
  check_orthonormal(v_, "TrialBasis");
  layout_.push_back({0, n_, 0, k_});
  init_blocks();
}

TrialBasis::TrialBasis(Eigen::MatrixXd v, std::vector<BlockSpec> layout,
                       Eigen::VectorXd sigma)
    : n_(v.rows()), k_(v.cols()), v_(std::move(v)), layout_(std::move(layout)),
      sigma_(std::move(sigma)) {
  if (n_ == 0 || k_ == 0) throw InvalidArgument("TrialBasis: empty basis");
  if (k_ > n_) throw DimensionMismatch("TrialBasis: more columns than rows");
  check_orthonormal(v_, "TrialBasis");
  init_blocks();
}

void TrialBasis::init_blocks() {
  for (const BlockSpec& b : layout_) {
    StoredBlock sb;
    sb.spec = b;
    sb.row_major.resize(static_cast<std::size_t>(b.rows) * b.cols);
    sb.col_major.resize(static_cast<std::size_t>(b.rows) * b.cols);
    for (Eigen::Index j = 0; j < b.cols; ++j)
      for (Eigen::Index i = 0; i < b.rows; ++i) {
        const double x = v_(b.row_begin + i, b.col_begin + j);
        sb.row_major[static_cast<std::size_t>(i) * b.cols + j] = x;
        sb.col_major[static_cast<std::size_t>(j) * b.rows + i] = x;
      }
    blocks_.push_back(std::move(sb));
  }
}

Eigen::VectorXd TrialBasis::apply(const Eigen::VectorXd& a) const {
  if (a.size() != k_)
    throw DimensionMismatch("TrialBasis::apply: coordinate length mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
  for (const StoredBlock& sb : blocks_) {
    kernels::matvec_row_major(sb.row_major.data(),
                              static_cast<std::size_t>(sb.spec.rows),
                              static_cast<std::size_t>(sb.spec.cols),
                              a.data() + sb.spec.col_begin,
                              y.data() + sb.spec.row_begin);
  }
  return y;
}

Eigen::VectorXd TrialBasis::apply_t(const Eigen::VectorXd& u) const {
  if (u.size() != n_)
    throw DimensionMismatch("TrialBasis::apply_t: state length mismatch");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(k_);
  for (const StoredBlock& sb : blocks_) {
    kernels::matvec_t_col_major(sb.col_major.data(),
                                static_cast<std::size_t>(sb.spec.rows),
                                static_cast<std::size_t>(sb.spec.cols),
                                u.data() + sb.spec.row_begin,
                                a.data() + sb.spec.col_begin);
  }
  return a;
}

Eigen::VectorXd TrialBasis::coarse(const Eigen::VectorXd& x) const {
  return apply(apply_t(x));
}

Eigen::VectorXd TrialBasis::fine(const Eigen::VectorXd& x) const {
  return x - coarse(x);
}

Eigen::MatrixXd TrialBasis::restrict_rows(const std::vector<int>& rows) const {
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), k_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n_)
      throw DimensionMismatch("TrialBasis::restrict_rows: row index out of range");
    sub.row(static_cast<Eigen::Index>(i)) = v_.row(rows[i]);
  }
  return sub;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> pod_build(const Eigen::MatrixXd& snapshots) {
  if (snapshots.rows() == 0 || snapshots.cols() == 0)
    throw EmptySnapshots("pod_build: snapshot matrix is empty");
  if (!snapshots.allFinite())
    throw InvalidArgument("pod_build: snapshot matrix has non-finite entries");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots, Eigen::ComputeThinU);
  const Eigen::VectorXd& sig = svd.singularValues();
  Eigen::Index keep = 0;
  while (keep < sig.size() && sig[keep] > 1e-12 * sig[0]) ++keep;
  return {svd.matrixU().leftCols(keep), sig.head(keep)};
}

Eigen::Index truncate_energy(const Eigen::VectorXd& sigma, double criterion) {
  if (!(criterion > 0.0) || criterion > 1.0)
    throw InvalidCriterion("truncate_energy: criterion must lie in (0, 1]");
  if (sigma.size() == 0) throw EmptySnapshots("truncate_energy: empty spectrum");
  for (Eigen::Index i = 1; i < sigma.size(); ++i)
    if (sigma[i] > sigma[i - 1])
      throw InvalidArgument("truncate_energy: singular values must descend");
  double total = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) total += sigma[i] * sigma[i];
  double cum = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    cum += sigma[i] * sigma[i];
    if (cum >= criterion * total) return i + 1;
  }
  return sigma.size();
}

TrialBasis assemble_block_basis(const std::vector<VarBlock>& blocks) {
  if (blocks.empty()) throw EmptySnapshots("assemble_block_basis: no blocks");
  Eigen::Index n = 0, k = 0, sig_len = 0;
  Eigen::Index expect_row = 0;
  std::vector<BlockSpec> layout;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const VarBlock& vb = blocks[b];
    if (vb.basis.rows() == 0 || vb.basis.cols() == 0)
      throw EmptySnapshots("assemble_block_basis: empty block " + std::to_string(b));
    if (vb.row_begin < expect_row)
      throw OverlappingBlocks("assemble_block_basis: block " + std::to_string(b) +
                              " overlaps the previous row range");
    if (vb.row_begin > expect_row)
      throw InvalidArgument("assemble_block_basis: gap before block " +
                            std::to_string(b) + "; row ranges must partition the state");
    check_orthonormal(vb.basis, "assemble_block_basis: block " + std::to_string(b));
    layout.push_back({vb.row_begin, vb.basis.rows(), k, vb.basis.cols()});
    expect_row = vb.row_begin + vb.basis.rows();
    n = expect_row;
    k += vb.basis.cols();
    sig_len += vb.singular_values.size();
  }
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, k);
  Eigen::VectorXd sigma(sig_len);
  Eigen::Index at = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    v.block(layout[b].row_begin, layout[b].col_begin, layout[b].rows,
            layout[b].cols) = blocks[b].basis;
    sigma.segment(at, blocks[b].singular_values.size()) = blocks[b].singular_values;
    at += blocks[b].singular_values.size();
  }
  return TrialBasis(std::move(v), std::move(layout), std::move(sigma));
}

}  // namespace romkit
