#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace romkit {

struct BlockSpec {
  Eigen::Index row_begin;
  Eigen::Index rows;
  Eigen::Index col_begin;
  Eigen::Index cols;
};

// Orthonormal trial basis Ṽ ∈ R^{N×K}, optionally block-diagonal per
// conserved variable.  Products with Ṽ and Ṽᵀ run blockwise through the
// parallel kernels; the fine-scale basis is never materialized, its projector
// is always the matrix-free I − ṼṼᵀ.
class TrialBasis {
 public:
  explicit TrialBasis(Eigen::MatrixXd v, Eigen::VectorXd sigma = Eigen::VectorXd());
  TrialBasis(Eigen::MatrixXd v, std::vector<BlockSpec> layout, Eigen::VectorXd sigma);

  Eigen::Index n() const { return n_; }
  Eigen::Index k() const { return k_; }
  const Eigen::MatrixXd& dense() const { return v_; }
  const std::vector<BlockSpec>& block_layout() const { return layout_; }
  const Eigen::VectorXd& singular_values() const { return sigma_; }

  // ũ = Ṽ a.
  Eigen::VectorXd apply(const Eigen::VectorXd& a) const;
  // ã = Ṽᵀ u.
  Eigen::VectorXd apply_t(const Eigen::VectorXd& u) const;

  // Π̃ x = Ṽ Ṽᵀ x and Π′ x = x − Ṽ Ṽᵀ x.
  Eigen::VectorXd coarse(const Eigen::VectorXd& x) const;
  Eigen::VectorXd fine(const Eigen::VectorXd& x) const;

  // Row restriction P_sᵀ Ṽ for a sorted row list.
  Eigen::MatrixXd restrict_rows(const std::vector<int>& rows) const;

 private:
  struct StoredBlock {
    BlockSpec spec;
    std::vector<double> row_major;
    std::vector<double> col_major;
  };

  void init_blocks();

  Eigen::Index n_ = 0;
  Eigen::Index k_ = 0;
  Eigen::MatrixXd v_;
  std::vector<BlockSpec> layout_;
  Eigen::VectorXd sigma_;
  std::vector<StoredBlock> blocks_;
};

// Thin SVD of a snapshot matrix: orthonormal left singular vectors and the
// descending singular values, with trailing columns dropped once
// σ_i ≤ 1e-12·σ₁.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> pod_build(const Eigen::MatrixXd& snapshots);

// Smallest K whose retained energy fraction Σ_{i≤K} σᵢ² / Σ σᵢ² reaches the
// criterion.
Eigen::Index truncate_energy(const Eigen::VectorXd& sigma, double criterion);

struct VarBlock {
  Eigen::Index row_begin;
  Eigen::MatrixXd basis;
  Eigen::VectorXd singular_values;
};

// Block-diagonal global basis from per-variable bases whose row ranges
// partition the state.
TrialBasis assemble_block_basis(const std::vector<VarBlock>& blocks);

}  // namespace romkit
