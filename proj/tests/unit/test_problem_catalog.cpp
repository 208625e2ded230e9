#include <doctest.h>

#include <cmath>

#include "semilinear/errors.hpp"
#include "semilinear/expression.hpp"
#include "semilinear/problem_catalog.hpp"

using namespace semilinear;

TEST_SUITE("problem_catalog") {
  TEST_CASE("names, lookups and parameter validation") {
    const auto names = list();
    CHECK(names.size() == 8);
    for (const auto& n : names) {
      const CatalogEntry e = get(n);
      CHECK(e.name == n);
      CHECK(e.boundary);
      CHECK(e.to_json()["name"] == n);
    }
    CHECK_THROWS_AS(get("no_such_problem"), UnknownNameError);
    CHECK_THROWS_AS(get("classical_obstacle_halfspace", {{"K", 1.0}}), ConfigError);
    CHECK_THROWS_AS(get("log_counterexample_p", {{"p", 1.5}}), ConfigError);
    CHECK_THROWS_AS(get("log_counterexample_p", {{"p", std::nan("")}}), ConfigError);
  }

  TEST_CASE("counterexample derivatives agree with centered differences") {
    const FieldPtr u = get("log_counterexample_p", {{"p", 0.5}}).reference;
    const double d = 1e-5;
    for (auto [x, y] : {std::pair{0.3, 0.2}, std::pair{-0.1, 0.45}, std::pair{0.05, -0.02}}) {
      const Eigen::Vector2d g = u->gradient(x, y);
      CHECK(g.x() == doctest::Approx((u->value(x + d, y) - u->value(x - d, y)) / (2 * d)).epsilon(1e-6));
      CHECK(g.y() == doctest::Approx((u->value(x, y + d) - u->value(x, y - d)) / (2 * d)).epsilon(1e-6));
      const Eigen::Matrix2d h = u->hessian(x, y);
      const Eigen::Vector2d hx = (u->gradient(x + d, y) - u->gradient(x - d, y)) / (2 * d);
      const Eigen::Vector2d hy = (u->gradient(x, y + d) - u->gradient(x, y - d)) / (2 * d);
      CHECK((h.col(0) - hx).norm() <= 1e-5 * std::max(1.0, h.norm()));
      CHECK((h.col(1) - hy).norm() <= 1e-5 * std::max(1.0, h.norm()));
      CHECK(u->laplacian(x, y) == doctest::Approx(h.trace()).epsilon(1e-10));
    }
    CHECK(u->value(0.0, 0.0) == 0.0);
  }

  TEST_CASE("closed forms satisfy their equations") {
    for (const auto& n : list()) {
      const CatalogEntry e = get(n);
      if (!e.reference) continue;
      const ReferenceReport rep = verify_reference(e);
      INFO(n);
      CHECK(rep.available);
      CHECK(rep.passed);
    }
    CHECK_FALSE(verify_reference(get("dini_borderline")).available);
  }

  TEST_CASE("inline problems from expressions") {
    const CatalogEntry e = custom_problem("two_phase", {{"g1", "1"}, {"g2", "-1"}}, "x1*abs(x1)/2");
    CHECK(e.rhs.kind == RhsKind::two_phase);
    CHECK(e.boundary(0.5, 0.0) == doctest::Approx(0.125));
    CHECK(e.rhs(0.0, 0.0, 1.0) == 1.0);
    CHECK(e.rhs(0.0, 0.0, -1.0) == -1.0);
    CHECK_THROWS_AS(custom_problem("two_phase", {{"g1", "1"}}, "0"), ConfigError);
    CHECK_THROWS_AS(custom_problem("cubic", {{"f", "1"}}, "0"), ConfigError);
    CHECK_THROWS_AS(custom_problem("continuous", {{"f", "t"}}, "t"), ConfigError);
    CHECK_THROWS_AS(custom_problem("continuous", {{"f", "system(1)"}}, "0"), ConfigError);
  }

  TEST_CASE("expression grammar") {
    CHECK(Expression::parse("2^3^2")(0, 0) == doctest::Approx(512.0));
    CHECK(Expression::parse("-x1^2")(3, 0) == doctest::Approx(-9.0));
    CHECK(Expression::parse("max(x1, x2) + |x|")(3, 4) == doctest::Approx(9.0));
    CHECK(Expression::parse("log(pi)")(0, 0) == doctest::Approx(std::log(M_PI)));
    CHECK(Expression::parse("t*x2")(0, 2, 3) == doctest::Approx(6.0));
    CHECK(Expression::parse("t").uses_t());
    CHECK_THROWS_AS(Expression::parse("1 +"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("x3"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("(1"), ConfigError);
  }

  TEST_CASE("prepared fields: sampled closed form or fresh solve") {
    const CatalogEntry ce = get("log_counterexample_p", {{"p", 0.5}});
    const PreparedField pc = prepare_field(ce, 65);
    CHECK_FALSE(pc.solution.has_value());
    CHECK(pc.grid.at(40, 20) == doctest::Approx(ce.reference->value(pc.grid.coord(40), pc.grid.coord(20))));

    const CatalogEntry ob = get("classical_obstacle_halfspace");
    const PreparedField po = prepare_field(ob, 65);
    REQUIRE(po.solution.has_value());
    CHECK(po.solution->report.converged);
    CHECK(po.field->value(0.3, 0.1) == doctest::Approx(0.045).epsilon(1e-6));
    // inside the positive phase the source is the phase value
    CHECK(po.field->laplacian(0.5, 0.0) == doctest::Approx(1.0));
  }
}
