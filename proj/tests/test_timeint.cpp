#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "romkit/errors.hpp"
#include "romkit/rng.hpp"
#include "romkit/timeint.hpp"

using namespace romkit;

namespace {

OdeSystem scalar_decay() {
  OdeSystem s;
  s.dim = 1;
  s.rhs = [](const Eigen::VectorXd& y) { return Eigen::VectorXd(-y); };
  return s;
}

double observed_order(Scheme scheme, double t_final) {
  OdeSystem sys = scalar_decay();
  const double exact = std::exp(-t_final);
  auto err = [&](double dt) {
    IntegratorSpec spec;
    spec.scheme = scheme;
    spec.dt = dt;
    spec.t_final = t_final;
    spec.newton_tol = 1e-14;
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    const Trajectory tr = integrate(sys, y0, spec);
    return std::abs(tr.states(0, tr.states.cols() - 1) - exact);
  };
  const double e1 = err(0.02), e2 = err(0.01);
  return std::log2(e1 / e2);
}

}  // namespace

TEST_CASE("one forward Euler step of scalar decay") {
  Eigen::VectorXd y(1);
  y << 1.0;
  const RhsFn rhs = [](const Eigen::VectorXd& v) { return Eigen::VectorXd(-v); };
  const Eigen::VectorXd y1 = step_explicit(rhs, y, 0.1, Scheme::ExplicitEuler);
  CHECK(y1(0) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("one three-stage step of scalar decay") {
  Eigen::VectorXd y(1);
  y << 1.0;
  const RhsFn rhs = [](const Eigen::VectorXd& v) { return Eigen::VectorXd(-v); };
  const Eigen::VectorXd y1 = step_explicit(rhs, y, 0.1, Scheme::SspRk3);
  // stages: 0.9, then 3/4 + (0.81)/4 = 0.9525, then 1/3 + 2*0.85725/3
  CHECK(y1(0) == doctest::Approx(0.9048333333333333).epsilon(1e-14));
}

TEST_CASE("one implicit Euler step of scalar decay solves the fixed point") {
  OdeSystem sys = scalar_decay();
  IntegratorSpec spec;
  spec.scheme = Scheme::ImplicitEuler;
  spec.dt = 0.5;
  spec.t_final = 0.5;
  spec.newton_tol = 1e-14;
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const Trajectory tr = integrate(sys, y0, spec);
  CHECK(tr.states(0, tr.states.cols() - 1) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("observed convergence orders on scalar decay") {
  CHECK(observed_order(Scheme::ExplicitEuler, 1.0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(observed_order(Scheme::ImplicitEuler, 1.0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(observed_order(Scheme::CrankNicolson, 1.0) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(observed_order(Scheme::SspRk3, 1.0) == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("implicit Euler is stable far beyond the explicit limit") {
  OdeSystem sys;
  sys.dim = 1;
  sys.rhs = [](const Eigen::VectorXd& y) { return Eigen::VectorXd(-1e6 * y); };
  IntegratorSpec spec;
  spec.scheme = Scheme::ImplicitEuler;
  spec.dt = 0.1;
  spec.t_final = 1.0;
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const Trajectory tr = integrate(sys, y0, spec);
  CHECK(tr.stable);
  CHECK(std::abs(tr.states(0, tr.states.cols() - 1)) <= 1e-5);

  spec.scheme = Scheme::ExplicitEuler;
  const Trajectory bad = integrate(sys, y0, spec);
  CHECK(!bad.stable);
}

TEST_CASE("Newton reaches the square root in a handful of iterations") {
  const auto res = [](const Eigen::VectorXd& y) {
    Eigen::VectorXd r(1);
    r(0) = y(0) * y(0) - 2.0;
    return r;
  };
  const JacFn jac = [](const Eigen::VectorXd& y) {
    Eigen::MatrixXd j(1, 1);
    j(0, 0) = 2.0 * y(0);
    return j;
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const NewtonResult nr = newton_direct(res, jac, y0, 1e-12, 25);
  CHECK(nr.converged);
  CHECK(nr.iterations <= 6);
  CHECK(nr.y(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("Newton reports failure on a rootless residual") {
  const auto res = [](const Eigen::VectorXd& y) {
    Eigen::VectorXd r(1);
    r(0) = y(0) * y(0) + 1.0;
    return r;
  };
  const JacFn jac = [](const Eigen::VectorXd& y) {
    Eigen::MatrixXd j(1, 1);
    j(0, 0) = 2.0 * y(0);
    return j;
  };
  Eigen::VectorXd y0(1);
  y0 << 2.0;
  const NewtonResult nr = newton_direct(res, jac, y0, 1e-12, 8);
  CHECK(!nr.converged);
}

TEST_CASE("GMRES solves the identity in one iteration") {
  Eigen::VectorXd b(5);
  b << 1, 2, 3, 4, 5;
  const GmresResult r = gmres([](const Eigen::VectorXd& x) { return x; }, b,
                              1e-12, 10);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((r.x - b).norm() <= 1e-12);
}

TEST_CASE("GMRES terminates within n iterations on a dense SPD system") {
  Rng rng(11);
  const Eigen::MatrixXd g = rng.normal_matrix(6, 6);
  const Eigen::MatrixXd a = g * g.transpose() + 6.0 * Eigen::MatrixXd::Identity(6, 6);
  const Eigen::VectorXd b = rng.normal_vector(6);
  const GmresResult r =
      gmres([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); }, b,
            1e-12, 6);
  CHECK(r.converged);
  CHECK(r.iterations <= 6);
  CHECK((a * r.x - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("JFNK agrees with the direct Newton path") {
  OdeSystem sys;
  sys.dim = 2;
  sys.rhs = [](const Eigen::VectorXd& y) {
    Eigen::VectorXd r(2);
    r(0) = -y(0) * y(0) * y(0) - 0.3 * y(1);
    r(1) = 0.3 * y(0) - 2.0 * y(1);
    return r;
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, -0.5;
  IntegratorSpec direct;
  direct.scheme = Scheme::ImplicitEuler;
  direct.dt = 0.05;
  direct.t_final = 0.5;
  direct.newton_tol = 1e-12;
  IntegratorSpec jfnk = direct;
  jfnk.linear_solver = LinearSolver::JfnkGmres;
  jfnk.gmres_tol = 1e-12;
  const Trajectory td = integrate(sys, y0, direct);
  const Trajectory tj = integrate(sys, y0, jfnk);
  REQUIRE(td.stable);
  REQUIRE(tj.stable);
  CHECK((td.states.col(td.states.cols() - 1) - tj.states.col(tj.states.cols() - 1))
            .norm() <= 1e-8);
  CHECK(tj.total_gmres_iters > 0);
}

TEST_CASE("save cadence and the truncated final step") {
  OdeSystem sys = scalar_decay();
  IntegratorSpec spec;
  spec.scheme = Scheme::ExplicitEuler;
  spec.dt = 0.1;
  spec.t_final = 0.95;  // ten steps, the last one shortened
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const Trajectory tr = integrate(sys, y0, spec, SaveSpec{2, false});
  REQUIRE(tr.steps == 10);
  REQUIRE(tr.times.size() == 5);
  CHECK(tr.times[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(tr.times.back() == doctest::Approx(0.95).epsilon(1e-15));
  const Trajectory with_ic = integrate(sys, y0, spec, SaveSpec{2, true});
  CHECK(with_ic.times.size() == 6);
  CHECK(with_ic.times[0] == 0.0);
  CHECK(with_ic.states(0, 0) == 1.0);
}

TEST_CASE("finite-time blowup trips the divergence flag") {
  OdeSystem sys;
  sys.dim = 1;
  sys.rhs = [](const Eigen::VectorXd& y) {
    return Eigen::VectorXd(y.array().square().matrix());
  };
  IntegratorSpec spec;
  spec.scheme = Scheme::ExplicitEuler;
  spec.dt = 0.5;
  spec.t_final = 40.0;
  Eigen::VectorXd y0(1);
  y0 << 2.0;
  const Trajectory tr = integrate(sys, y0, spec);
  CHECK(!tr.stable);
  CHECK(tr.steps < 80);
}

TEST_CASE("fully discrete residuals match their definitions") {
  const RhsFn rhs = [](const Eigen::VectorXd& y) { return Eigen::VectorXd(-2.0 * y); };
  Eigen::VectorXd yp(1), y(1);
  yp << 1.0;
  y << 0.8;
  {
    StepResidual r(Scheme::ImplicitEuler, 0.1, yp, rhs);
    CHECK(r(y)(0) == doctest::Approx((0.8 - 1.0) / 0.1 + 2.0 * 0.8).epsilon(1e-14));
    CHECK(r.implicit_weight() == 1.0);
  }
  {
    StepResidual r(Scheme::CrankNicolson, 0.1, yp, rhs);
    CHECK(r(y)(0) ==
          doctest::Approx((0.8 - 1.0) / 0.1 + 0.5 * (2.0 * 0.8 + 2.0 * 1.0))
              .epsilon(1e-14));
    CHECK(r.implicit_weight() == 0.5);
  }
}

TEST_CASE("dense finite-difference Jacobian approximates a known matrix") {
  Eigen::MatrixXd a(3, 3);
  a << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  const RhsFn rhs = [&](const Eigen::VectorXd& y) { return Eigen::VectorXd(a * y); };
  Rng rng(3);
  const Eigen::VectorXd y = rng.normal_vector(3);
  const Eigen::MatrixXd j = fd_jacobian(rhs, y);
  CHECK((j - a).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("invalid stepping inputs are rejected") {
  OdeSystem sys = scalar_decay();
  IntegratorSpec spec;
  spec.dt = -1.0;
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  CHECK_THROWS_AS(integrate(sys, y0, spec), InvalidArgument);
}
