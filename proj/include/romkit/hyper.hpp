#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "romkit/basis.hpp"
#include "romkit/fom.hpp"
#include "romkit/rom.hpp"

namespace romkit {

// Offline data for gappy-POD evaluation of a reduced RHS.  P is the row
// selector onto sample_indices, P_s the selector onto stencil_indices; both
// are stored as index lists, never as matrices.
struct HyperData {
  Eigen::MatrixXd u;                 // N × r RHS basis
  Eigen::VectorXd sigma;             // singular values behind u's columns
  std::vector<int> sample_indices;   // N_p rows, sorted unique
  std::vector<int> stencil_indices;  // N_s rows; closure of the samples
  Eigen::MatrixXd pinv;              // r × N_p pseudo-inverse of PᵀU
  Eigen::MatrixXd proj_precomp;      // K × r product ṼᵀU
  Eigen::MatrixXd stencil_u;         // N_s × r rows of U on the stencil
  Eigen::MatrixXd stencil_v;         // N_s × K rows of Ṽ on the stencil

  int np() const { return static_cast<int>(sample_indices.size()); }
  int ns() const { return static_cast<int>(stencil_indices.size()); }
  int rank() const { return static_cast<int>(u.cols()); }
};

// Maps a row index to every row belonging to the same mesh cell.
using CellMapFn = std::function<std::vector<int>(int)>;

// Column-pivoted QR of Uᵀ ranks rows by leverage.  Pivots are taken in order
// (at least r of them) and each selected row pulls in its whole cell via
// cell_map until the augmented set reaches target_np rows.  Returns a sorted
// unique index list of size ≥ max(r, min(target_np, N)).
std::vector<int> qr_sample(const Eigen::MatrixXd& u, int target_np,
                           const CellMapFn& cell_map);
std::vector<int> qr_sample(const Eigen::MatrixXd& u, int target_np,
                           const FomSystem& sys);

// Moore–Penrose inverse through a thin SVD, dropping singular values below
// 1e-12·σ₁.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m);

// Assembles the precomputed blocks for an already chosen basis/sample pair.
// Used by gappy_offline and when reloading persisted artifacts.
HyperData finalize_hyper(Eigen::MatrixXd u, Eigen::VectorXd sigma,
                         std::vector<int> sample_indices, const FomSystem& sys,
                         const TrialBasis& basis);

// Offline pipeline: SVD of the RHS snapshots, keep r modes, select sampling
// rows by qr_sample, close the stencil through the model, precompute [PᵀU]⁺
// and ṼᵀU.  Throws RankDeficientSampling when r exceeds the snapshot rank or
// PᵀU loses column rank.
HyperData gappy_offline(const Eigen::MatrixXd& rhs_snapshots, int r,
                        int target_np, const FomSystem& sys,
                        const TrialBasis& basis);

// Least-squares coordinates of a vector observed only at the sample rows.
Eigen::VectorXd gappy_coords(const HyperData& h,
                             const Eigen::VectorXd& sampled_values);
// Full-space reconstruction U·coords.
Eigen::VectorXd gappy_reconstruct(const HyperData& h,
                                  const Eigen::VectorXd& coords);

// Hyper-reduced closure evaluation: reconstructs the state on the stencil,
// evaluates the RHS at the sample rows only, lifts it to generalized RHS
// coordinates, and adds the τ-weighted Jacobian action on the orthogonal
// complement of the reconstructed RHS.  τ = 0 yields hyper-reduced Galerkin
// and skips the Jacobian stage entirely.
Eigen::VectorXd hyper_apg_rhs(const Eigen::VectorXd& a, const FomSystem& sys,
                              const TrialBasis& basis, const HyperData& hyper,
                              double tau, double eps = 1e-5);

// One implicit step minimizing ‖Pᵀr‖₂² with W = Pᵀ(∂r/∂u)Ṽ.  Identical to
// lspg_step when the samples cover every row.
LspgResult collocated_lspg_step(const Eigen::VectorXd& a_prev,
                                const FomSystem& sys, const TrialBasis& basis,
                                const std::vector<int>& sample_indices,
                                double dt, Scheme scheme,
                                const LspgConfig& cfg = {});

}  // namespace romkit
