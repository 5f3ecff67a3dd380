#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "romkit/analysis.hpp"
#include "romkit/basis.hpp"
#include "romkit/errors.hpp"
#include "romkit/euler1d.hpp"
#include "romkit/hyper.hpp"
#include "romkit/lti.hpp"
#include "romkit/rng.hpp"
#include "romkit/rom.hpp"
#include "romkit/timeint.hpp"

using namespace romkit;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

void announce(int criterion, bool pass, const std::string& detail) {
  std::printf("[criterion %d] %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

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

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

constexpr double kDt = 5e-4;
constexpr double kTableTau = 4.3e-4;
constexpr int kRegressionModes = 150;
const std::vector<int> kSweepModes = {60, 75, 90, 105, 120, 135, 150, 165, 180};
const std::vector<int> kCorrModes = {30, 60, 90, 150, 180, 240};
const std::vector<int> kGridModes = {30,  60,  75,  90,  105, 120,
                                     135, 150, 165, 180, 240};

// Shared shock-tube reference data: one full-order run saved on the coarse
// grid, per-variable mode stacks, and memoized reduced runs keyed by mode
// count.  Everything downstream reads from here so each expensive march
// happens once.
class SodLab {
 public:
  Euler1d sys{Euler1dConfig{}};
  Trajectory fom;

  SodLab() {
    OdeSystem ode;
    ode.dim = sys.dim();
    ode.rhs = [this](const Eigen::VectorXd& u) { return sys.rhs(u); };
    fom = integrate(ode, sys.initial_condition(), marching(Scheme::SspRk3, kDt),
                    SaveSpec{2, false});
    const Eigen::Index nc = sys.config().n_cells;
    for (int v = 0; v < 3; ++v) {
      auto [modes, sigma] = pod_build(fom.states.middleRows(v * nc, nc));
      const Eigen::Index keep = std::min<Eigen::Index>(80, modes.cols());
      stacks_.push_back(
          VarBlock{v * nc, modes.leftCols(keep), sigma.head(keep)});
    }
  }

  static IntegratorSpec marching(Scheme s, double dt, double t_final = 1.0) {
    IntegratorSpec spec;
    spec.scheme = s;
    spec.dt = dt;
    spec.t_final = t_final;
    return spec;
  }

  // Saves on the same 1e-3 grid the snapshots use.
  static SaveSpec on_snapshot_grid(double dt) {
    return SaveSpec{dt == kDt ? 2 : 1, false};
  }

  const TrialBasis& basis(int k) {
    auto it = bases_.find(k);
    if (it != bases_.end()) return it->second;
    const Eigen::Index per = k / 3;
    std::vector<VarBlock> trimmed;
    for (const auto& b : stacks_)
      trimmed.push_back(VarBlock{b.row_begin, b.basis.leftCols(per),
                                 b.singular_values.head(per)});
    return bases_.emplace(k, assemble_block_basis(trimmed)).first->second;
  }

  const Eigen::VectorXd& a0(int k) {
    auto it = a0_.find(k);
    if (it != a0_.end()) return it->second;
    return a0_.emplace(k, basis(k).apply_t(sys.initial_condition()))
        .first->second;
  }

  Trajectory run(const RomMethod& m, Scheme s, double dt, int k,
                 double t_final = 1.0) {
    return run_rom(sys, basis(k), a0(k), m, marching(s, dt, t_final),
                   on_snapshot_grid(dt))
        .traj;
  }

  double integrated_error(const Trajectory& rom, int k) {
    if (!rom.stable) return std::numeric_limits<double>::infinity();
    return error_norm(rom, fom, basis(k)).integrated;
  }

  const Trajectory& galerkin_explicit(int k) {
    auto it = galerkin_rk3_.find(k);
    if (it != galerkin_rk3_.end()) return it->second;
    return galerkin_rk3_
        .emplace(k, run(RomMethod::galerkin(), Scheme::SspRk3, kDt, k))
        .first->second;
  }

  const Trajectory& lspg_implicit(int k) {
    auto it = lspg_ie_.find(k);
    if (it != lspg_ie_.end()) return it->second;
    return lspg_ie_
        .emplace(k, run(RomMethod::lspg(), Scheme::ImplicitEuler, kDt, k))
        .first->second;
  }

  // One geometric grid shared by every mode count, spanning the heuristic
  // memory lengths of all of them with a factor-4 margin on both ends.
  const std::vector<double>& tau_grid() {
    if (!tau_grid_.empty()) return tau_grid_;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int k : kGridModes) {
      const double h = tau_heuristic(a0(k), sys, basis(k), 0.2);
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
    lo /= 4.0;
    hi *= 4.0;
    const int n = 12;
    for (int i = 0; i < n; ++i)
      tau_grid_.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
    return tau_grid_;
  }

  const MisfitResult& misfit(int k) {
    auto it = misfit_.find(k);
    if (it != misfit_.end()) return it->second;
    RomFactory factory = [this, k](double tau) {
      return run(RomMethod::apg(tau), Scheme::SspRk3, kDt, k);
    };
    return misfit_.emplace(k, misfit_tau(tau_grid(), factory, fom, basis(k)))
        .first->second;
  }

  double inverse_rho(int k) {
    return tau_heuristic(a0(k), sys, basis(k), 1.0);
  }

  struct Table1 {
    double apg_ie = 0.0;
    double g_ie = 0.0;
    double lspg = 0.0;
    double g_rk3 = 0.0;
    bool all_stable = false;
  };

  const Table1& table1() {
    if (table1_) return *table1_;
    const Trajectory apg =
        run(RomMethod::apg(kTableTau), Scheme::ImplicitEuler, kDt,
            kRegressionModes);
    const Trajectory gie = run(RomMethod::galerkin(), Scheme::ImplicitEuler,
                               kDt, kRegressionModes);
    const Trajectory& ls = lspg_implicit(kRegressionModes);
    const Trajectory& grk = galerkin_explicit(kRegressionModes);
    Table1 t;
    t.all_stable = apg.stable && gie.stable && ls.stable && grk.stable;
    t.apg_ie = integrated_error(apg, kRegressionModes);
    t.g_ie = integrated_error(gie, kRegressionModes);
    t.lspg = integrated_error(ls, kRegressionModes);
    t.g_rk3 = integrated_error(grk, kRegressionModes);
    table1_ = t;
    return *table1_;
  }

 private:
  std::vector<VarBlock> stacks_;
  std::map<int, TrialBasis> bases_;
  std::map<int, Eigen::VectorXd> a0_;
  std::map<int, Trajectory> galerkin_rk3_;
  std::map<int, Trajectory> lspg_ie_;
  std::vector<double> tau_grid_;
  std::map<int, MisfitResult> misfit_;
  std::optional<Table1> table1_;
};

SodLab& lab() {
  static SodLab l;
  return l;
}

// Small shock tube with a basis built from its own snapshots, for the
// algebraic identity checks.
struct SmallSod {
  Euler1d sys;
  TrialBasis basis{Eigen::MatrixXd::Identity(1, 1)};
  Eigen::MatrixXd coords;
  Eigen::VectorXd a_mid;

  SmallSod(int n_cells, int per_var)
      : sys([&] {
          Euler1dConfig c;
          c.n_cells = n_cells;
          return c;
        }()) {
    OdeSystem ode;
    ode.dim = sys.dim();
    ode.rhs = [this](const Eigen::VectorXd& u) { return sys.rhs(u); };
    const Trajectory traj =
        integrate(ode, sys.initial_condition(),
                  SodLab::marching(Scheme::SspRk3, 1e-3, 0.05), SaveSpec{1, true});
    std::vector<VarBlock> blocks;
    for (int v = 0; v < 3; ++v) {
      auto [modes, sigma] =
          pod_build(traj.states.middleRows(v * n_cells, n_cells));
      blocks.push_back(VarBlock{v * n_cells, modes.leftCols(per_var),
                                sigma.head(per_var)});
    }
    basis = assemble_block_basis(blocks);
    coords = basis.dense().transpose() * traj.states;
    a_mid = coords.col(coords.cols() / 2);
  }
};

// Columns of a save-every-step trajectory that land on the 1e-3 snapshot
// grid, for error evaluation against the stored reference.
Trajectory on_snapshot_times(const Trajectory& t, double t_final) {
  Trajectory out;
  out.stable = t.stable;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    const double ti = t.times[i];
    if (ti <= 0.0 || ti > t_final + 1e-12) continue;
    const double m = ti / 1e-3;
    if (std::abs(m - std::round(m)) < 1e-9) {
      keep.push_back(static_cast<Eigen::Index>(i));
      out.times.push_back(ti);
    }
  }
  out.states.resize(t.states.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    out.states.col(static_cast<Eigen::Index>(i)) = t.states.col(keep[i]);
  return out;
}

Trajectory window(const Trajectory& full, Eigen::Index n) {
  Trajectory out;
  out.stable = full.stable;
  out.times.assign(full.times.begin(), full.times.begin() + n);
  out.states = full.states.leftCols(n);
  return out;
}

}  // namespace

TEST_CASE("shock tube integrated-error regression at 150 modes") {
  const SodLab::Table1& t = lab().table1();
  const double target[4] = {0.8057, 1.0344, 1.1668, 1.5752};
  const double got[4] = {t.apg_ie, t.g_ie, t.lspg, t.g_rk3};
  bool ordered = t.apg_ie < t.g_ie && t.g_ie < t.lspg && t.lspg <= t.g_rk3;
  bool within = true;
  for (int i = 0; i < 4; ++i)
    within = within && std::abs(got[i] - target[i]) <= 0.25 * target[i];
  announce(1, t.all_stable && ordered && within,
           fmt("apg_ie=%.4f g_ie=%.4f lspg=%.4f g_rk3=%.4f vs "
               "0.8057/1.0344/1.1668/1.5752 within 25%%, ordering strict",
               t.apg_ie, t.g_ie, t.lspg, t.g_rk3));
  CHECK(t.all_stable);
  CHECK(t.apg_ie < t.g_ie);
  CHECK(t.g_ie < t.lspg);
  CHECK(t.lspg <= t.g_rk3);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(got[i] - target[i]) <= 0.25 * target[i]);
}

TEST_CASE("time-step sensitivity separates the implicit methods") {
  const SodLab::Table1& t = lab().table1();
  const double lspg_coarse = lab().integrated_error(
      lab().run(RomMethod::lspg(), Scheme::ImplicitEuler, 1e-3,
                kRegressionModes),
      kRegressionModes);
  const double apg_coarse = lab().integrated_error(
      lab().run(RomMethod::apg(kTableTau), Scheme::ImplicitEuler, 1e-3,
                kRegressionModes),
      kRegressionModes);
  const double lspg_growth = (lspg_coarse - t.lspg) / t.lspg;
  const double apg_change = std::abs(apg_coarse - t.apg_ie) / t.apg_ie;
  const bool pass = std::isfinite(lspg_coarse) && std::isfinite(apg_coarse) &&
                    lspg_growth >= 0.20 && apg_change <= 0.05;
  announce(2, pass,
           fmt("lspg error %+0.1f%% at dt=1e-3 (need >= +20%%); apg change "
               "%.1f%% (need <= 5%%)",
               100.0 * lspg_growth, 100.0 * apg_change));
  CHECK(std::isfinite(lspg_coarse));
  CHECK(std::isfinite(apg_coarse));
  CHECK(lspg_growth >= 0.20);
  CHECK(apg_change <= 0.05);
}

TEST_CASE("mode-count stability envelope") {
  std::vector<int> unstable_g;
  std::vector<int> apg_failed;
  std::vector<int> lspg_failed;
  for (int k : kSweepModes) {
    if (!lab().galerkin_explicit(k).stable) unstable_g.push_back(k);
    bool apg_ok = false;
    try {
      apg_ok = lab().misfit(k).best_index >= 0;
    } catch (const AllRunsUnstable&) {
    }
    if (!apg_ok) apg_failed.push_back(k);
    if (!lab().lspg_implicit(k).stable) lspg_failed.push_back(k);
  }
  const bool low_mode_blowup =
      std::any_of(unstable_g.begin(), unstable_g.end(),
                  [](int k) { return k <= 135; });
  const bool pass =
      low_mode_blowup && apg_failed.empty() && lspg_failed.empty();
  announce(3, pass,
           fmt("explicit projection diverges at K={%s}; closure and "
               "least-squares complete all nine mode counts",
               join_ints(unstable_g).c_str()));
  CHECK(low_mode_blowup);
  CHECK(apg_failed.empty());
  CHECK(lspg_failed.empty());
}

TEST_CASE("optimal memory length tracks the inverse spectral radius") {
  const double t0 = now_s();
  std::vector<double> tau_opt;
  std::vector<double> rho_inv;
  for (int k : kCorrModes) {
    tau_opt.push_back(lab().misfit(k).tau_opt);
    rho_inv.push_back(lab().inverse_rho(k));
  }
  const double r = pearson(tau_opt, rho_inv);
  const double wall = now_s() - t0;
  const bool pass = r >= 0.9 && wall <= 3600.0;
  announce(4, pass,
           fmt("pearson(tau_opt, 1/rho) = %.4f over K={30..240} "
               "(need >= 0.90), %.0fs",
               r, wall));
  CHECK(r >= 0.9);
  CHECK(wall <= 3600.0);
}

TEST_CASE("linear-theory verification suite on a seeded ensemble") {
  const Report rep = run_verification_suite(20, 20260814ULL);
  int bound_rows = 0, order_rows = 0, sign_rows = 0, delta_rows = 0;
  for (const CheckRow& row : rep.rows) {
    if (row.name.find("coarse_error_bound") != std::string::npos) ++bound_rows;
    if (row.name.find("eig_order") != std::string::npos) ++order_rows;
    if (row.name.find("eig_sign") != std::string::npos) ++sign_rows;
    if (row.name.find("delta_sign") != std::string::npos) ++delta_rows;
  }
  const bool covered =
      bound_rows > 0 && order_rows > 0 && sign_rows > 0 && delta_rows > 0;
  announce(5, rep.all_pass() && covered,
           fmt("%d/%zu checks pass on 20 seeded self-adjoint systems "
               "(bounds %d, ordering %d, sign %d, per-unit-tau %d)",
               static_cast<int>(rep.rows.size()) - rep.n_failed(),
               rep.rows.size(), bound_rows, order_rows, sign_rows,
               delta_rows));
  if (!rep.all_pass()) std::printf("%s\n", rep.summary().c_str());
  CHECK(rep.all_pass());
  CHECK(covered);
}

TEST_CASE("algebraic identities between the closure routes") {
  // Direct closure versus assembly through the adjoint-corrected test basis.
  double d_testbasis = 0.0;
  {
    LtiSystem sys(random_stable_matrix(24, 631));
    TrialBasis basis(orthonormal(24, 6, 632));
    Rng rng(633);
    const Eigen::VectorXd a = rng.normal_vector(6);
    const Eigen::VectorXd direct = apg_rhs(a, sys, basis, 0.3, JacMode::Exact);
    const Eigen::VectorXd adjoint = apg_test_basis_rhs(a, sys, basis, 0.3);
    d_testbasis = (direct - adjoint).norm() / std::max(1.0, direct.norm());

    SmallSod s(40, 4);
    const Eigen::VectorXd d2 =
        apg_rhs(s.a_mid, s.sys, s.basis, 1e-3, JacMode::Exact) -
        apg_test_basis_rhs(s.a_mid, s.sys, s.basis, 1e-3);
    d_testbasis = std::max(d_testbasis, d2.norm());
  }

  // Zero memory length reduces to plain projection.
  double d_tau0 = 0.0;
  {
    SmallSod s(40, 4);
    const Eigen::VectorXd g = galerkin_rhs(s.a_mid, s.sys, s.basis);
    d_tau0 = (apg_rhs(s.a_mid, s.sys, s.basis, 0.0) - g).norm() /
             std::max(1.0, g.norm());
  }

  // A square basis reproduces the full trajectory in rotated coordinates.
  double d_square = 0.0;
  {
    LtiSystem sys(random_stable_matrix(16, 641));
    TrialBasis basis(orthonormal(16, 16, 642));
    Rng rng(643);
    const Eigen::VectorXd u0 = rng.normal_vector(16);
    OdeSystem ode;
    ode.dim = sys.dim();
    ode.rhs = [&sys](const Eigen::VectorXd& u) { return sys.rhs(u); };
    const IntegratorSpec spec = SodLab::marching(Scheme::SspRk3, 1e-3, 0.1);
    const Trajectory full = integrate(ode, u0, spec, SaveSpec{1, true});
    const Trajectory rom = run_rom(sys, basis, basis.apply_t(u0),
                                   RomMethod::galerkin(), spec,
                                   SaveSpec{1, true})
                               .traj;
    for (Eigen::Index j = 0; j < full.states.cols(); ++j)
      d_square = std::max(
          d_square,
          (basis.apply(rom.states.col(j)) - full.states.col(j)).norm());
  }

  // The least-squares step collapses onto the implicit projected step as dt
  // shrinks, at second order.
  double order = 0.0;
  {
    const int n = 10, k = 4;
    LtiSystem sys(random_stable_matrix(n, 651));
    const Eigen::MatrixXd v = orthonormal(n, k, 652);
    TrialBasis basis(v);
    Rng rng(653);
    const Eigen::VectorXd a_prev = rng.normal_vector(k);
    const Eigen::MatrixXd m = v.transpose() * sys.A() * v;
    auto gap = [&](double dt) {
      LspgConfig cfg;
      cfg.jac_mode = JacMode::Exact;
      cfg.grad_tol = 1e-14;
      const LspgResult ls =
          lspg_step(a_prev, sys, basis, dt, Scheme::ImplicitEuler, cfg);
      const Eigen::VectorXd gal =
          (Eigen::MatrixXd::Identity(k, k) - dt * m).lu().solve(a_prev);
      return (ls.a - gal).norm();
    };
    const double d1 = gap(0.02);
    const double d2 = gap(0.01);
    const double d3 = gap(0.005);
    order = std::min(std::log2(d1 / d2), std::log2(d2 / d3));
  }

  const bool pass = d_testbasis <= 1e-10 && d_tau0 <= 1e-14 &&
                    d_square <= 1e-10 && order >= 1.8;
  announce(6, pass,
           fmt("test-basis gap %.1e (<=1e-10); tau=0 gap %.1e (<=1e-14); "
               "square-basis gap %.1e (<=1e-10); collapse order %.2f (>=1.8)",
               d_testbasis, d_tau0, d_square, order));
  CHECK(d_testbasis <= 1e-10);
  CHECK(d_tau0 <= 1e-14);
  CHECK(d_square <= 1e-10);
  CHECK(order >= 1.8);
}

TEST_CASE("per-step flop totals and the explicit cost ratio") {
  CostModel m;
  m.n = 1000;
  m.k = 10;
  m.omega = 50;
  m.eta = 4;
  const bool totals_ok =
      flop_estimate(m, Algorithm::GalerkinExplicit) == 89010 &&
      flop_estimate(m, Algorithm::ApgExplicit) == 185000 &&
      flop_estimate(m, Algorithm::GalerkinImplicit) == 980230 &&
      flop_estimate(m, Algorithm::ApgImplicitDirect) == 2036120 &&
      flop_estimate(m, Algorithm::Lspg) == 1012900 &&
      flop_estimate(m, Algorithm::ApgImplicitJfnk) == 925220;
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  for (long long k = 1; k <= 100; ++k) {
    CostModel mk;
    mk.n = 1000;
    mk.k = k;
    mk.omega = 50;
    mk.eta = 4;
    const double ratio =
        double(flop_estimate(mk, Algorithm::ApgExplicit)) /
        double(flop_estimate(mk, Algorithm::GalerkinExplicit));
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  const bool ratio_ok = rmin >= 1.9 && rmax <= 2.2;
  announce(7, totals_ok && ratio_ok,
           fmt("six per-step totals exact; explicit closure/projection ratio "
               "in [%.3f, %.3f] for K<=100 (need within [1.9, 2.2])",
               rmin, rmax));
  CHECK(flop_estimate(m, Algorithm::GalerkinExplicit) == 89010);
  CHECK(flop_estimate(m, Algorithm::ApgExplicit) == 185000);
  CHECK(flop_estimate(m, Algorithm::GalerkinImplicit) == 980230);
  CHECK(flop_estimate(m, Algorithm::ApgImplicitDirect) == 2036120);
  CHECK(flop_estimate(m, Algorithm::Lspg) == 1012900);
  CHECK(flop_estimate(m, Algorithm::ApgImplicitJfnk) == 925220);
  CHECK(ratio_ok);
}

TEST_CASE("hyper-reduction work bound and fidelity") {
  // Full sampling with a spanning right-hand-side basis matches the exact
  // closure and the dense least-squares step.
  double d_full_closure = 0.0;
  double d_full_gal = 0.0;
  double d_full_lspg = 0.0;
  {
    LtiSystem sys(random_stable_matrix(12, 701));
    TrialBasis basis(orthonormal(12, 4, 702));
    const Eigen::MatrixXd u = orthonormal(12, 12, 703);
    const HyperData h = finalize_hyper(u, Eigen::VectorXd::Ones(12),
                                       all_rows(12), sys, basis);
    Rng rng(704);
    const Eigen::VectorXd a = rng.normal_vector(4);
    for (double tau : {0.0, 0.2}) {
      const Eigen::VectorXd gap = hyper_apg_rhs(a, sys, basis, h, tau) -
                                  apg_rhs(a, sys, basis, tau);
      d_full_closure = std::max(
          d_full_closure,
          gap.norm() / std::max(1.0, apg_rhs(a, sys, basis, tau).norm()));
    }
    LspgConfig cfg;
    cfg.jac_mode = JacMode::Exact;
    cfg.grad_tol = 1e-13;
    const Eigen::VectorXd a_prev = rng.normal_vector(4);
    const LspgResult dense =
        lspg_step(a_prev, sys, basis, 0.05, Scheme::ImplicitEuler, cfg);
    const LspgResult coll = collocated_lspg_step(
        a_prev, sys, basis, all_rows(12), 0.05, Scheme::ImplicitEuler, cfg);
    d_full_lspg = (dense.a - coll.a).norm() / std::max(1.0, dense.a.norm());
  }
  {
    // Training at reconstructed states puts the evaluated right-hand side
    // inside the span exactly.
    SmallSod s(40, 4);
    Eigen::MatrixXd train(s.sys.dim(), s.coords.cols());
    for (Eigen::Index j = 0; j < s.coords.cols(); ++j)
      train.col(j) = s.sys.rhs(s.basis.apply(s.coords.col(j)));
    auto [u, sigma] = pod_build(train);
    const HyperData h = finalize_hyper(u, sigma, all_rows(s.sys.dim()), s.sys,
                                       s.basis);
    const Eigen::VectorXd g = galerkin_rhs(s.a_mid, s.sys, s.basis);
    d_full_gal = (hyper_apg_rhs(s.a_mid, s.sys, s.basis, h, 0.0) - g).norm() /
                 std::max(1.0, g.norm());
  }

  // Shock tube with a 100-mode right-hand-side basis trained along the full
  // reduced trajectory: the sampled run must stay within twice the full run's
  // integrated error while touching only stencil rows.
  const int k = 60;
  const double t_final = 0.1;
  const double tau = kTableTau;
  SodLab& L = lab();
  const IntegratorSpec spec = SodLab::marching(Scheme::SspRk3, kDt, t_final);
  const Trajectory full =
      run_rom(L.sys, L.basis(k), L.a0(k), RomMethod::apg(tau), spec,
              SaveSpec{1, true})
          .traj;
  Eigen::MatrixXd rhs_train(L.sys.dim(), full.states.cols());
  Eigen::VectorXd tmp;
  for (Eigen::Index j = 0; j < full.states.cols(); ++j) {
    L.sys.rhs(L.basis(k).apply(full.states.col(j)), tmp);
    rhs_train.col(j) = tmp;
  }
  const HyperData hd = gappy_offline(rhs_train, 100, 300, L.sys, L.basis(k));

  L.sys.reset_row_counters();
  OdeSystem ode;
  ode.dim = L.basis(k).k();
  ode.rhs = [&](const Eigen::VectorXd& a) {
    return hyper_apg_rhs(a, L.sys, L.basis(k), hd, tau);
  };
  const Trajectory sampled = integrate(ode, L.a0(k), spec, SaveSpec{1, true});
  const long long max_rows = L.sys.max_rows_per_eval();

  const Eigen::Index n_ref = static_cast<Eigen::Index>(
      std::llround(t_final / 1e-3));
  const Trajectory ref = window(L.fom, n_ref);
  const double err_full =
      error_norm(on_snapshot_times(full, t_final), ref, L.basis(k)).integrated;
  double err_sampled = std::numeric_limits<double>::infinity();
  if (sampled.stable)
    err_sampled = error_norm(on_snapshot_times(sampled, t_final), ref,
                             L.basis(k))
                      .integrated;

  const bool rows_ok = max_rows <= hd.ns() && hd.ns() < L.sys.dim();
  const bool equiv_ok = d_full_closure <= 1e-8 && d_full_gal <= 1e-8 &&
                        d_full_lspg <= 1e-10;
  const bool ratio_ok =
      full.stable && sampled.stable && err_sampled <= 2.0 * err_full;
  announce(8, rows_ok && equiv_ok && ratio_ok,
           fmt("rows/eval %lld <= stencil %d < %d; full-sampling gaps "
               "%.1e/%.1e/%.1e; r=100 error %.4f vs full %.4f (ratio %.2f, "
               "need <= 2)",
               max_rows, hd.ns(), static_cast<int>(L.sys.dim()),
               d_full_closure, d_full_gal, d_full_lspg, err_sampled, err_full,
               err_sampled / err_full));
  CHECK(d_full_closure <= 1e-8);
  CHECK(d_full_gal <= 1e-8);
  CHECK(d_full_lspg <= 1e-10);
  CHECK(full.stable);
  CHECK(sampled.stable);
  CHECK(max_rows <= hd.ns());
  CHECK(hd.ns() < L.sys.dim());
  CHECK(err_sampled <= 2.0 * err_full);
}
