#include <doctest.h>

#include <cmath>
#include <numbers>

#include "semilinear/elliptic_solver.hpp"
#include "semilinear/errors.hpp"

using namespace semilinear;

namespace {

double sup_error(const ScalarField& u, const std::function<double(double, double)>& exact) {
  double err = 0.0;
  for (int j = 0; j < u.grid_size(); ++j)
    for (int i = 0; i < u.grid_size(); ++i)
      if (u.in_mask(i, j)) err = std::max(err, std::abs(u.at(i, j) - exact(u.coord(i), u.coord(j))));
  return err;
}

double wave(double x, double y) { return std::sin(1.5 * x + 0.5) * std::cosh(y) + x * y * y; }
double wave_lap(double x, double y) { return (1.0 - 2.25) * std::sin(1.5 * x + 0.5) * std::cosh(y) + 2 * x; }

}  // namespace

TEST_SUITE("elliptic_solver") {
  TEST_CASE("operator classification and exactness on quadratics") {
    const DiskLaplacian op(33);
    CHECK(op.index(0, 0) == -1);
    CHECK(op.index(16, 16) >= 0);
    const BoundaryFunction q = [](double x, double y) { return 2 * x * x - x * y + 0.5 * y * y + x; };
    Eigen::VectorXd x(op.unknowns());
    for (int k = 0; k < op.unknowns(); ++k) {
      const auto [i, j] = op.node(k);
      x[k] = q(-1.0 + op.spacing() * i, -1.0 + op.spacing() * j);
    }
    const Eigen::VectorXd lap = op.apply(x, q);
    CHECK((lap.array() - 5.0).abs().maxCoeff() < 1e-9);
  }

  TEST_CASE("Dirichlet solve is exact for quadratic solutions") {
    const ScalarField rhs = ScalarField::from_function(65, [](double, double) { return 3.0; });
    const ScalarField u = solve_dirichlet(rhs, [](double x, double y) { return x * x + 0.5 * y * y + x * y; });
    CHECK(sup_error(u, [](double x, double y) { return x * x + 0.5 * y * y + x * y; }) < 1e-10);
  }

  TEST_CASE("manufactured Poisson solution converges at second order") {
    auto err = [](int n) {
      const ScalarField rhs = ScalarField::from_function(n, wave_lap);
      return sup_error(solve_dirichlet(rhs, wave), wave);
    };
    const double e65 = err(65), e129 = err(129);
    CHECK(e129 < 1e-4);
    CHECK(e65 / e129 > 3.5);
  }

  TEST_CASE("semilinear Picard solve of Delta u = u^3 + f") {
    const RhsSpec rhs = RhsSpec::continuous(
        [](double x, double y, double t) { return t * t * t + wave_lap(x, y) - std::pow(wave(x, y), 3); });
    const Solution sol = solve(rhs, wave, 65);
    CHECK(sol.report.converged);
    CHECK(sol.report.kind == "semilinear");
    CHECK(sup_error(sol.u, wave) < 5e-4);
    CHECK(sol.report.residual_trace.size() == static_cast<std::size_t>(sol.report.iterations));
    CHECK(sol.report.secant_from == 0);
  }

  TEST_CASE("a source steep in t stalls Picard and is finished by the secant form") {
    const auto f = [](double t) { return t == 0.0 ? 0.0 : std::copysign(1.0, t) / -std::log(std::min(std::abs(t), 0.5)); };
    const RhsSpec rhs = RhsSpec::continuous([f](double, double, double t) { return f(t); });
    const Solution sol = solve(rhs, [](double x, double y) { return 0.1 * x * y; }, 65);
    CHECK(sol.report.converged);
    CHECK(sol.report.secant_from > 0);
    const ScalarField lap = fd_laplacian(sol.u);
    double res = 0.0;
    for (int j = 0; j < 65; ++j)
      for (int i = 0; i < 65; ++i)
        // f is too steep at u = 0 for a residual to say anything there
        if (std::hypot(sol.u.coord(i), sol.u.coord(j)) < 0.8 && std::abs(sol.u.at(i, j)) > 1e-4)
          res = std::max(res, std::abs(lap.at(i, j) - f(sol.u.at(i, j))));
    CHECK(res < 1e-3);
  }

  TEST_CASE("half-space obstacle is reproduced to rounding") {
    const RhsSpec rhs = RhsSpec::two_phase([](double, double, double) { return 1.0; },
                                           [](double, double, double) { return 0.0; });
    const BoundaryFunction b = [](double x, double) { return x > 0 ? 0.5 * x * x : 0.0; };
    const Solution sol = solve(rhs, b, 129);
    CHECK(sol.report.converged);
    CHECK(sup_error(sol.u, b) < 1e-9);
    int negative = 0;
    for (auto p : sol.phase) negative += p == kNegative;
    CHECK(negative == 0);
  }

  TEST_CASE("two-phase membrane with equal jumps is reproduced") {
    const RhsSpec rhs = RhsSpec::two_phase([](double, double, double) { return 1.0; },
                                           [](double, double, double) { return -1.0; });
    const BoundaryFunction b = [](double x, double) { return 0.5 * x * std::abs(x); };
    const Solution sol = solve(rhs, b, 129);
    CHECK(sup_error(sol.u, b) < 1e-9);
    CHECK(pde_residual(sol.u, [&](double x, double y, double t) { return rhs(x, y, t); }, 0.05, true) < 1e-8);
  }

  TEST_CASE("no-sign solve on the nonnegative branch has a zero set and no negative phase") {
    const RhsSpec rhs = RhsSpec::no_sign([](double x, double, double) { return 1.0 + 0.5 * x; });
    const BoundaryFunction b = [](double x, double) { return x > 0 ? 0.5 * x * x : 0.0; };
    SolverConfig cfg;
    cfg.nonnegative_branch = true;
    const Solution sol = solve(rhs, b, 65, cfg);
    CHECK(sol.report.kind == "no_sign_nonnegative");
    int zero = 0, negative = 0;
    for (auto p : sol.phase) {
      zero += p == kZero;
      negative += p == kNegative;
    }
    CHECK(zero > 0);
    CHECK(negative == 0);
    for (double v : sol.u.values()) CHECK(v >= -1e-12);
  }

  TEST_CASE("composite right-hand side switches on the sign of t") {
    const RhsSpec two = RhsSpec::two_phase([](double, double, double) { return 2.0; },
                                           [](double, double, double) { return -3.0; });
    CHECK(two(0, 0, 1e-300) == 2.0);
    CHECK(two(0, 0, -1e-300) == -3.0);
    CHECK(two(0, 0, 0.0) == 0.0);
    const RhsSpec ns = RhsSpec::no_sign([](double, double, double) { return 5.0; });
    CHECK(ns(0, 0, -1.0) == 5.0);
    CHECK(ns(0, 0, 0.0) == 0.0);
    CHECK(to_string(RhsKind::two_phase) == "two_phase");
  }

  TEST_CASE("configuration errors and nonconvergence") {
    SolverConfig bad;
    bad.damping = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SolverConfig{};
    bad.tol_picard = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    SolverConfig capped;
    capped.max_picard = 1;
    const RhsSpec rhs = RhsSpec::continuous([](double, double, double t) { return std::sin(5 * t) + 1.0; });
    try {
      solve(rhs, [](double x, double) { return x; }, 33, capped);
      FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
      CHECK(e.trace().size() == 1);
    }
  }

  TEST_CASE("Newtonian potential of the unit-density disk is (|x|^2 - 1)/4") {
    const ScalarField density = ScalarField::from_function(129, [](double, double) { return 1.0; });
    const ScalarField v = newtonian_potential(density);
    const auto hs = fd_hessian(v);
    double dv = 0.0, dh = 0.0;
    for (int j = 0; j < 129; ++j)
      for (int i = 0; i < 129; ++i) {
        const double x = v.coord(i), y = v.coord(j);
        if (x * x + y * y > 0.25) continue;
        dv = std::max(dv, std::abs(v.at(i, j) - 0.25 * (x * x + y * y - 1.0)));
        dh = std::max(dh, std::abs(hs[0].at(i, j) - 0.5) + std::abs(hs[1].at(i, j)) + std::abs(hs[3].at(i, j) - 0.5));
      }
    CHECK(dv < 2e-3);
    CHECK(dh < 2e-2);
  }

  TEST_CASE("log kernel antiderivative has mixed derivative log(x^2 + y^2)") {
    const double h = 1e-4;
    for (auto [x, y] : {std::pair{0.3, 0.7}, std::pair{-0.4, 0.2}, std::pair{1.1, -0.9}}) {
      const double mixed = (log_kernel_antiderivative(x + h, y + h) - log_kernel_antiderivative(x + h, y - h) -
                            log_kernel_antiderivative(x - h, y + h) + log_kernel_antiderivative(x - h, y - h)) /
                           (4 * h * h);
      CHECK(mixed == doctest::Approx(std::log(x * x + y * y)).epsilon(1e-5));
    }
  }
}
