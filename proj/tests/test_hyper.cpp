#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "romkit/errors.hpp"
#include "romkit/euler1d.hpp"
#include "romkit/hyper.hpp"
#include "romkit/lti.hpp"
#include "romkit/rng.hpp"
#include "romkit/rom.hpp"

using namespace romkit;

namespace {

Eigen::MatrixXd orthonormal(int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::MatrixXd g = rng.normal_matrix(n, k);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
         Eigen::MatrixXd::Identity(n, k);
}

std::vector<int> all_rows(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

struct SodFixture {
  Euler1d sys;
  TrialBasis basis;
  Eigen::MatrixXd rhs_snapshots;
  Eigen::VectorXd a_mid;

  explicit SodFixture(int n_cells, int k)
      : sys([&] {
          Euler1dConfig cfg;
          cfg.n_cells = n_cells;
          return cfg;
        }()),
        basis(Eigen::MatrixXd::Identity(1, 1)) {
    OdeSystem ode;
    ode.dim = sys.dim();
    ode.rhs = [this](const Eigen::VectorXd& u) { return sys.rhs(u); };
    IntegratorSpec spec;
    spec.scheme = Scheme::SspRk3;
    spec.dt = 1e-3;
    spec.t_final = 0.04;
    const Trajectory tr =
        integrate(ode, sys.initial_condition(), spec, SaveSpec{1, true});
    auto [modes, sigma] = pod_build(tr.states);
    const int kk = std::min<int>(k, static_cast<int>(modes.cols()));
    basis = TrialBasis(modes.leftCols(kk), sigma.head(kk));
    rhs_snapshots.resize(sys.dim(), tr.states.cols());
    for (Eigen::Index j = 0; j < tr.states.cols(); ++j)
      rhs_snapshots.col(j) = sys.rhs(tr.states.col(j));
    a_mid = basis.apply_t(tr.states.col(tr.states.cols() / 2));
  }
};

}  // namespace

TEST_CASE("one-mode gappy reconstruction has a closed form") {
  Eigen::MatrixXd u(4, 1);
  u << 0.5, -0.5, 0.5, 0.5;
  LtiSystem sys(random_stable_matrix(4, 7));
  TrialBasis basis(orthonormal(4, 2, 8));
  HyperData h = finalize_hyper(u, Eigen::VectorXd::Ones(1), {2}, sys, basis);
  Eigen::VectorXd sampled(1);
  sampled << 0.3;
  const Eigen::VectorXd c = gappy_coords(h, sampled);
  CHECK(c.size() == 1);
  CHECK(c(0) == doctest::Approx(0.3 / 0.5).epsilon(1e-14));
  const Eigen::VectorXd rec = gappy_reconstruct(h, c);
  CHECK((rec - u * c(0)).norm() <= 1e-15);
  CHECK(rec(2) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("sample-then-fit round trip is the identity on basis coordinates") {
  const int n = 20, r = 4;
  const Eigen::MatrixXd u = orthonormal(n, r, 17);
  LtiSystem sys(random_stable_matrix(n, 18));
  TrialBasis basis(orthonormal(n, 6, 19));
  HyperData h = finalize_hyper(u, Eigen::VectorXd::Ones(r),
                               {0, 3, 5, 8, 11, 14, 19}, sys, basis);
  Rng rng(20);
  const Eigen::VectorXd c0 = rng.normal_vector(r);
  const Eigen::VectorXd full = gappy_reconstruct(h, c0);
  Eigen::VectorXd sampled(h.np());
  for (int i = 0; i < h.np(); ++i) sampled(i) = full(h.sample_indices[i]);
  CHECK((gappy_coords(h, sampled) - c0).norm() <= 1e-10);
}

TEST_CASE("requesting more modes than the snapshot rank is rejected") {
  const int n = 10;
  Rng rng(27);
  const Eigen::VectorXd s1 = rng.normal_vector(n);
  const Eigen::VectorXd s2 = rng.normal_vector(n);
  Eigen::MatrixXd snaps(n, 4);
  snaps << s1, s2, s1 + s2, 2.0 * s1 - s2;  // rank 2
  LtiSystem sys(random_stable_matrix(n, 28));
  TrialBasis basis(orthonormal(n, 3, 29));
  CHECK_THROWS_AS(gappy_offline(snaps, 3, 5, sys, basis), RankDeficientSampling);
  CHECK_NOTHROW(gappy_offline(snaps, 2, 4, sys, basis));
}

TEST_CASE("sampling fewer rows than modes is rejected") {
  const int n = 12, r = 3;
  const Eigen::MatrixXd u = orthonormal(n, r, 37);
  LtiSystem sys(random_stable_matrix(n, 38));
  TrialBasis basis(orthonormal(n, 4, 39));
  CHECK_THROWS_AS(
      finalize_hyper(u, Eigen::VectorXd::Ones(r), {1, 5}, sys, basis),
      RankDeficientSampling);
}

TEST_CASE("pivoted sampling picks the dominant-leverage row first") {
  const int n = 9;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, 2);
  // Row 7 carries almost all of the first mode; row 2 dominates the second.
  u(7, 0) = 1.0;
  u.col(0) += Eigen::VectorXd::Constant(n, 1e-3);
  u(2, 1) = 1.0;
  u.col(1) += Eigen::VectorXd::Constant(n, -1e-3);
  const CellMapFn identity = [](int row) { return std::vector<int>{row}; };
  const std::vector<int> picked = qr_sample(u, 2, identity);
  CHECK(std::find(picked.begin(), picked.end(), 7) != picked.end());
  CHECK(std::find(picked.begin(), picked.end(), 2) != picked.end());
  CHECK(static_cast<int>(picked.size()) >= 2);
  CHECK(std::is_sorted(picked.begin(), picked.end()));
}

TEST_CASE("sampled rows pull in every conserved variable of their cell") {
  SodFixture fx(30, 6);
  HyperData h = gappy_offline(fx.rhs_snapshots, 8, 20, fx.sys, fx.basis);
  for (int s : h.sample_indices) {
    for (int sibling : fx.sys.rows_of_cell(fx.sys.cell_of_row(s))) {
      CHECK(std::find(h.sample_indices.begin(), h.sample_indices.end(),
                      sibling) != h.sample_indices.end());
    }
  }
  CHECK(h.np() >= 8);
  // Stencil closes over the flux neighbours of every sampled cell.
  const std::vector<int> expected =
      fx.sys.stencil_rows(h.sample_indices);
  CHECK(h.stencil_indices == expected);
}

TEST_CASE("full sampling with a complete basis reproduces the exact closure") {
  const int n = 12, k = 4;
  LtiSystem sys(random_stable_matrix(n, 47));
  TrialBasis basis(orthonormal(n, k, 48));
  const Eigen::MatrixXd u = orthonormal(n, n, 49);  // complete RHS basis
  HyperData h =
      finalize_hyper(u, Eigen::VectorXd::Ones(n), all_rows(n), sys, basis);
  Rng rng(50);
  const Eigen::VectorXd a = rng.normal_vector(k);
  for (double tau : {0.0, 0.2, 1.0}) {
    const Eigen::VectorXd hr = hyper_apg_rhs(a, sys, basis, h, tau);
    const Eigen::VectorXd full = apg_rhs(a, sys, basis, tau);
    CHECK((hr - full).norm() <= 1e-8 * std::max(1.0, full.norm()));
  }
}

TEST_CASE("full sampling reproduces the projection at the training states") {
  SodFixture fx(16, 5);
  // Keep every RHS mode so the training snapshots lie in the span exactly.
  auto [modes, sigma] = pod_build(fx.rhs_snapshots);
  const int r = static_cast<int>(modes.cols());
  HyperData h = finalize_hyper(modes, sigma, all_rows(fx.sys.dim()), fx.sys,
                               fx.basis);
  // Reconstruction through the trial basis is only approximate, so compare
  // against the same reconstructed state passed through the exact pipeline.
  const Eigen::VectorXd g_h = hyper_apg_rhs(fx.a_mid, fx.sys, fx.basis, h, 0.0);
  const Eigen::VectorXd g = galerkin_rhs(fx.a_mid, fx.sys, fx.basis);
  // R(Ṽa) need not lie in the RHS span, but with full sampling the gappy fit
  // is the orthogonal projection onto it, so the coarse component survives
  // whenever the span covers the snapshot residues; rank r covers them here.
  CHECK(r >= 1);
  CHECK((g_h - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
}

TEST_CASE("collocation on every row matches the dense least-squares step") {
  const int n = 8, k = 3;
  LtiSystem sys(random_stable_matrix(n, 57));
  TrialBasis basis(orthonormal(n, k, 58));
  Rng rng(59);
  const Eigen::VectorXd a_prev = rng.normal_vector(k);
  LspgConfig cfg;
  cfg.jac_mode = JacMode::Exact;
  cfg.grad_tol = 1e-13;
  const LspgResult dense = lspg_step(a_prev, sys, basis, 0.05,
                                     Scheme::ImplicitEuler, cfg);
  const LspgResult coll = collocated_lspg_step(a_prev, sys, basis, all_rows(n),
                                               0.05, Scheme::ImplicitEuler, cfg);
  CHECK((dense.a - coll.a).norm() <= 1e-10 * std::max(1.0, dense.a.norm()));
  CHECK(coll.converged);
}

TEST_CASE("duplicate sample rows do not change the collocated step") {
  const int n = 10, k = 2;
  LtiSystem sys(random_stable_matrix(n, 67));
  TrialBasis basis(orthonormal(n, k, 68));
  Rng rng(69);
  const Eigen::VectorXd a_prev = rng.normal_vector(k);
  const std::vector<int> rows = {1, 4, 6, 9};
  const std::vector<int> dup = {4, 1, 9, 6, 4, 4, 1};
  const LspgResult a = collocated_lspg_step(a_prev, sys, basis, rows, 0.02,
                                            Scheme::ImplicitEuler);
  const LspgResult b = collocated_lspg_step(a_prev, sys, basis, dup, 0.02,
                                            Scheme::ImplicitEuler);
  CHECK((a.a - b.a).norm() == 0.0);
}

TEST_CASE("collocating fewer rows than modes is rejected") {
  const int n = 10, k = 4;
  LtiSystem sys(random_stable_matrix(n, 77));
  TrialBasis basis(orthonormal(n, k, 78));
  CHECK_THROWS_AS(collocated_lspg_step(Eigen::VectorXd::Zero(k), sys, basis,
                                       {0, 3, 7}, 0.02, Scheme::ImplicitEuler),
                  RankDeficientNormalEquations);
}

TEST_CASE("hyper-reduced evaluation touches only the sampled rows") {
  SodFixture fx(40, 4);
  HyperData h = gappy_offline(fx.rhs_snapshots, 6, 15, fx.sys, fx.basis);
  REQUIRE(h.np() < static_cast<int>(fx.sys.dim()));

  fx.sys.reset_row_counters();
  (void)hyper_apg_rhs(fx.a_mid, fx.sys, fx.basis, h, 0.0);
  CHECK(fx.sys.rows_evaluated() == h.np());
  CHECK(fx.sys.max_rows_per_eval() <= h.ns());

  fx.sys.reset_row_counters();
  (void)hyper_apg_rhs(fx.a_mid, fx.sys, fx.basis, h, 1e-3);
  CHECK(fx.sys.rows_evaluated() == 2 * h.np());
  CHECK(fx.sys.max_rows_per_eval() <= h.ns());

  fx.sys.reset_row_counters();
  (void)collocated_lspg_step(fx.a_mid, fx.sys, fx.basis, h.sample_indices,
                             1e-3, Scheme::ImplicitEuler);
  CHECK(fx.sys.max_rows_per_eval() <= h.ns());
  CHECK(fx.sys.rows_evaluated() > 0);
}

TEST_CASE("collocated marching stays close to the dense step on the shock tube") {
  SodFixture fx(24, 5);
  HyperData h = gappy_offline(fx.rhs_snapshots, 8, 30, fx.sys, fx.basis);
  LspgConfig cfg;
  cfg.grad_tol = 1e-11;
  const LspgResult dense =
      lspg_step(fx.a_mid, fx.sys, fx.basis, 1e-3, Scheme::ImplicitEuler, cfg);
  const LspgResult coll = collocated_lspg_step(
      fx.a_mid, fx.sys, fx.basis, h.sample_indices, 1e-3,
      Scheme::ImplicitEuler, cfg);
  // Different objective, same minimand family: the collocated step must stay
  // within the scale of the update itself.
  const double update = (dense.a - fx.a_mid).norm();
  CHECK((coll.a - dense.a).norm() <= 0.5 * std::max(update, 1e-12));
}
