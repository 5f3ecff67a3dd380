#include "romkit/euler1d.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "romkit/errors.hpp"

namespace romkit {

namespace {

// Roe flux on raw triples, noexcept so it can run inside a parallel region;
// returns false instead of throwing when the states (or their Roe average)
// leave the physical regime.
bool roe_flux_raw(const double* wl, const double* wr, double gamma, bool fix,
                  double fix_delta, double* f) noexcept {
  const double rho_l = wl[0], rho_r = wr[0];
  if (!(rho_l > 0.0) || !(rho_r > 0.0)) return false;
  const double u_l = wl[1] / rho_l, u_r = wr[1] / rho_r;
  const double p_l = (gamma - 1.0) * (wl[2] - 0.5 * rho_l * u_l * u_l);
  const double p_r = (gamma - 1.0) * (wr[2] - 0.5 * rho_r * u_r * u_r);
  if (!(p_l > 0.0) || !(p_r > 0.0)) return false;
  const double h_l = (wl[2] + p_l) / rho_l;
  const double h_r = (wr[2] + p_r) / rho_r;

  const double sq_l = std::sqrt(rho_l), sq_r = std::sqrt(rho_r);
  const double inv = 1.0 / (sq_l + sq_r);
  const double uh = (sq_l * u_l + sq_r * u_r) * inv;
  const double hh = (sq_l * h_l + sq_r * h_r) * inv;
  const double ch2 = (gamma - 1.0) * (hh - 0.5 * uh * uh);
  if (!(ch2 > 0.0)) return false;
  const double ch = std::sqrt(ch2);
  const double rhoh = sq_l * sq_r;

  const double drho = rho_r - rho_l;
  const double du = u_r - u_l;
  const double dp = p_r - p_l;

  const double a1 = 0.5 * (dp - rhoh * ch * du) / ch2;
  const double a2 = drho - dp / ch2;
  const double a3 = 0.5 * (dp + rhoh * ch * du) / ch2;

  double l1 = std::abs(uh - ch);
  const double l2 = std::abs(uh);
  double l3 = std::abs(uh + ch);
  if (fix) {
    const double delta = fix_delta * ch;
    if (l1 < delta) l1 = 0.5 * (l1 * l1 / delta + delta);
    if (l3 < delta) l3 = 0.5 * (l3 * l3 / delta + delta);
  }

  const double fl0 = rho_l * u_l, fr0 = rho_r * u_r;
  const double fl1 = rho_l * u_l * u_l + p_l, fr1 = rho_r * u_r * u_r + p_r;
  const double fl2 = u_l * (wl[2] + p_l), fr2 = u_r * (wr[2] + p_r);

  const double d0 = a1 * l1 + a2 * l2 + a3 * l3;
  const double d1 = a1 * l1 * (uh - ch) + a2 * l2 * uh + a3 * l3 * (uh + ch);
  const double d2 = a1 * l1 * (hh - uh * ch) + a2 * l2 * (0.5 * uh * uh) +
                    a3 * l3 * (hh + uh * ch);

  f[0] = 0.5 * (fl0 + fr0) - 0.5 * d0;
  f[1] = 0.5 * (fl1 + fr1) - 0.5 * d1;
  f[2] = 0.5 * (fl2 + fr2) - 0.5 * d2;
  return std::isfinite(f[0]) && std::isfinite(f[1]) && std::isfinite(f[2]);
}

void check_cell_physical(const Eigen::VectorXd& state, int n, int c) {
  const double rho = state[c];
  const double m = state[n + c];
  const double re = state[2 * n + c];
  if (!std::isfinite(rho) || !std::isfinite(m) || !std::isfinite(re))
    throw NonPhysicalState("non-finite state in cell " + std::to_string(c));
  if (!(rho > 0.0))
    throw NonPhysicalState("nonpositive density in cell " + std::to_string(c));
  if (!(re - 0.5 * m * m / rho > 0.0))
    throw NonPhysicalState("nonpositive internal energy in cell " +
                           std::to_string(c));
}

// Conserved triple of cell c, where c = −1 and c = n address the mirrored
// wall ghosts (momentum negated).
void cell_state(const Eigen::VectorXd& state, int n, int c, double* w) {
  int cc = c;
  double sign = 1.0;
  if (c < 0) {
    cc = 0;
    sign = -1.0;
  } else if (c >= n) {
    cc = n - 1;
    sign = -1.0;
  }
  w[0] = state[cc];
  w[1] = sign * state[n + cc];
  w[2] = state[2 * n + cc];
}

}  // namespace

Eigen::Vector3d conserved_from_primitive(const PrimState& w, double gamma) {
  Eigen::Vector3d c;
  c[0] = w.rho;
  c[1] = w.rho * w.u;
  c[2] = w.p / (gamma - 1.0) + 0.5 * w.rho * w.u * w.u;
  return c;
}

Eigen::Vector3d euler_flux(const Eigen::Vector3d& w, double gamma) {
  if (!(w[0] > 0.0)) throw NonPhysicalState("euler_flux: nonpositive density");
  const double u = w[1] / w[0];
  const double p = (gamma - 1.0) * (w[2] - 0.5 * w[0] * u * u);
  if (!(p > 0.0)) throw NonPhysicalState("euler_flux: nonpositive pressure");
  return {w[1], w[1] * u + p, u * (w[2] + p)};
}

Eigen::Vector3d roe_flux(const Eigen::Vector3d& wl, const Eigen::Vector3d& wr,
                         double gamma, bool entropy_fix,
                         double entropy_fix_delta) {
  Eigen::Vector3d f;
  if (!roe_flux_raw(wl.data(), wr.data(), gamma, entropy_fix,
                    entropy_fix_delta, f.data()))
    throw NonPhysicalState("roe_flux: states outside the physical regime");
  return f;
}

void euler1d_rhs(const Eigen::VectorXd& state, const Euler1dConfig& cfg,
                 Eigen::VectorXd& out) {
  const int n = cfg.n_cells;
  if (state.size() != 3 * static_cast<Eigen::Index>(n))
    throw DimensionMismatch("euler1d_rhs: state length " +
                            std::to_string(state.size()) + ", expected " +
                            std::to_string(3 * n));
  for (int c = 0; c < n; ++c) check_cell_physical(state, n, c);

  const double dx = (cfg.x_max - cfg.x_min) / n;
  Eigen::MatrixXd flux(3, n + 1);
  std::atomic<bool> bad{false};
#pragma omp parallel for schedule(static) if (cfg.parallel)
  for (int i = 0; i <= n; ++i) {
    double wl[3], wr[3];
    cell_state(state, n, i - 1, wl);
    cell_state(state, n, i, wr);
    if (!roe_flux_raw(wl, wr, cfg.gamma, cfg.entropy_fix,
                      cfg.entropy_fix_delta, flux.data() + 3 * i))
      bad.store(true, std::memory_order_relaxed);
  }
  if (bad.load())
    throw NonPhysicalState("euler1d_rhs: Roe average left the physical regime");

  out.resize(3 * static_cast<Eigen::Index>(n));
#pragma omp parallel for schedule(static) if (cfg.parallel)
  for (int c = 0; c < n; ++c) {
    for (int v = 0; v < 3; ++v)
      out[v * n + c] = -(flux(v, c + 1) - flux(v, c)) / dx;
  }
}

Euler1d::Euler1d(Euler1dConfig cfg) : cfg_(cfg) {
  if (cfg_.n_cells < 1) throw InvalidArgument("Euler1d: n_cells must be positive");
  if (!(cfg_.x_max > cfg_.x_min))
    throw InvalidArgument("Euler1d: domain must have positive length");
  if (!(cfg_.gamma > 1.0)) throw InvalidArgument("Euler1d: gamma must exceed 1");
  for (const PrimState* w : {&cfg_.left, &cfg_.right}) {
    if (!(w->rho > 0.0) || !(w->p > 0.0))
      throw NonPhysicalState("Euler1d: initial primitive state needs rho > 0, p > 0");
  }
  dx_ = (cfg_.x_max - cfg_.x_min) / cfg_.n_cells;
}

Eigen::Index Euler1d::dim() const { return 3 * static_cast<Eigen::Index>(cfg_.n_cells); }

void Euler1d::rhs(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
  euler1d_rhs(u, cfg_, out);
  count_rows(dim());
}

Eigen::MatrixXd Euler1d::jac_dense(const Eigen::VectorXd& u) const {
  const Eigen::Index n = dim();
  Eigen::VectorXd r0(n), r1(n);
  rhs(u, r0);
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd up = u;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-7 * (1.0 + std::abs(u[j]));
    up[j] = u[j] + h;
    rhs(up, r1);
    up[j] = u[j];
    jac.col(j) = (r1 - r0) / h;
  }
  return jac;
}

void Euler1d::rhs_rows(const Eigen::VectorXd& u, const std::vector<int>& rows,
                       Eigen::VectorXd& out) const {
  const int n = cfg_.n_cells;
  if (u.size() != dim())
    throw DimensionMismatch("Euler1d::rhs_rows: state length mismatch");
  out.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int row = rows[k];
    if (row < 0 || row >= dim())
      throw DimensionMismatch("Euler1d::rhs_rows: row index out of range");
    const int v = row / n;
    const int c = row % n;
    for (int cc = std::max(0, c - 1); cc <= std::min(n - 1, c + 1); ++cc)
      check_cell_physical(u, n, cc);
    double wm[3], wc[3], wp[3], fl[3], fr[3];
    cell_state(u, n, c - 1, wm);
    cell_state(u, n, c, wc);
    cell_state(u, n, c + 1, wp);
    if (!roe_flux_raw(wm, wc, cfg_.gamma, cfg_.entropy_fix,
                      cfg_.entropy_fix_delta, fl) ||
        !roe_flux_raw(wc, wp, cfg_.gamma, cfg_.entropy_fix,
                      cfg_.entropy_fix_delta, fr))
      throw NonPhysicalState("Euler1d::rhs_rows: Roe average left the physical regime");
    out[static_cast<Eigen::Index>(k)] = -(fr[v] - fl[v]) / dx_;
  }
  count_rows(static_cast<long long>(rows.size()));
}

std::vector<int> Euler1d::stencil_rows(const std::vector<int>& rows) const {
  const int n = cfg_.n_cells;
  std::vector<int> out;
  out.reserve(rows.size() * 9);
  for (int row : rows) {
    const int c = row % n;
    for (int cc = std::max(0, c - 1); cc <= std::min(n - 1, c + 1); ++cc)
      for (int v = 0; v < 3; ++v) out.push_back(v * n + cc);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int Euler1d::n_cells() const { return cfg_.n_cells; }

int Euler1d::cell_of_row(int row) const { return row % cfg_.n_cells; }

std::vector<int> Euler1d::rows_of_cell(int cell) const {
  const int n = cfg_.n_cells;
  return {cell, n + cell, 2 * n + cell};
}

Eigen::VectorXd Euler1d::initial_condition() const {
  const int n = cfg_.n_cells;
  Eigen::VectorXd u0(3 * static_cast<Eigen::Index>(n));
  for (int c = 0; c < n; ++c) {
    const double xc = cfg_.x_min + (c + 0.5) * dx_;
    const Eigen::Vector3d w = conserved_from_primitive(
        xc < cfg_.split_x ? cfg_.left : cfg_.right, cfg_.gamma);
    u0[c] = w[0];
    u0[n + c] = w[1];
    u0[2 * n + c] = w[2];
  }
  return u0;
}

}  // namespace romkit
