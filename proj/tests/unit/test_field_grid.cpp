#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "semilinear/errors.hpp"
#include "semilinear/field.hpp"
#include "semilinear/field_grid.hpp"

using namespace semilinear;

namespace {

double cubic(double x, double y) { return 0.3 * x * x * x - x * x * y + 0.2 * y * y * y + x * y - 0.5 * y + 1.0; }

double smooth(double x, double y) { return std::sin(2.0 * x) * std::exp(0.5 * y); }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("semilinear_unit_" + name);
}

}  // namespace

TEST_SUITE("field_grid") {
  TEST_CASE("grid size must be odd and at least 5") {
    CHECK_THROWS_AS(ScalarField(4), InvalidDimensionError);
    CHECK_THROWS_AS(ScalarField(3), InvalidDimensionError);
    const ScalarField f(5);
    CHECK(f.spacing() == doctest::Approx(0.5));
    CHECK(f.coord(0) == -1.0);
    CHECK(f.coord(4) == doctest::Approx(1.0));
    CHECK(f.in_mask(2, 2));
    CHECK_FALSE(f.in_mask(0, 0));
  }

  TEST_CASE("bicubic interpolation reproduces cubics and node values") {
    const ScalarField f = ScalarField::from_function(33, cubic);
    for (double x : {-0.41, 0.0, 0.137, 0.6})
      for (double y : {-0.52, 0.03, 0.29}) {
        CHECK(f.interpolate(x, y) == doctest::Approx(cubic(x, y)).epsilon(1e-12));
        const Eigen::Vector2d g = f.interpolate_gradient(x, y);
        CHECK(g.x() == doctest::Approx(0.9 * x * x - 2 * x * y + y).epsilon(1e-10));
        CHECK(g.y() == doctest::Approx(-x * x + 0.6 * y * y + x - 0.5).epsilon(1e-10));
      }
    CHECK(f.interpolate(f.coord(10), f.coord(20)) == f.at(10, 20));
  }

  TEST_CASE("sampling outside the disk is rejected") {
    const ScalarField f = ScalarField::from_function(17, cubic);
    CHECK_THROWS_AS(sample(f, 0.9, 0.9), OutOfDomainError);
    CHECK(sample(f, 0.1, 0.2) == doctest::Approx(cubic(0.1, 0.2)));
    const auto v = sample(f, {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.5, 0.0)});
    CHECK(v.size() == 2);
  }

  TEST_CASE("difference stencils are exact on quadratics, including near the circle") {
    const ScalarField f = ScalarField::from_function(65, [](double x, double y) { return 1.5 * x * x - x * y + 0.25 * y * y + x; });
    const auto [gx, gy] = fd_gradient(f);
    const auto hs = fd_hessian(f);
    const ScalarField lap = fd_laplacian(f);
    double dev = 0.0;
    for (int j = 0; j < 65; ++j)
      for (int i = 0; i < 65; ++i) {
        if (!f.in_mask(i, j)) continue;
        const double x = f.coord(i), y = f.coord(j);
        dev = std::max(dev, std::abs(gx.at(i, j) - (3 * x - y + 1)));
        dev = std::max(dev, std::abs(gy.at(i, j) - (-x + 0.5 * y)));
        dev = std::max(dev, std::abs(hs[0].at(i, j) - 3.0));
        dev = std::max(dev, std::abs(hs[1].at(i, j) + 1.0));
        dev = std::max(dev, std::abs(hs[2].at(i, j) + 1.0));
        dev = std::max(dev, std::abs(hs[3].at(i, j) - 0.5));
        dev = std::max(dev, std::abs(lap.at(i, j) - 3.5));
      }
    CHECK(dev < 1e-9);
  }

  TEST_CASE("limited gradient is exact across a crease and matches on quadratics") {
    const ScalarField crease = ScalarField::from_function(65, [](double x, double) { return x > 0 ? 0.5 * x * x : 0.0; });
    const auto [gx, gy] = fd_gradient_limited(crease);
    const auto [cx, cy] = fd_gradient(crease);
    double dev = 0.0;
    for (int j = 4; j < 61; ++j)
      for (int i = 4; i < 61; ++i)
        if (crease.in_mask(i, j) && std::hypot(crease.coord(i), crease.coord(j)) < 0.8)
          dev = std::max({dev, std::abs(gx.at(i, j) - std::max(crease.coord(i), 0.0)), std::abs(gy.at(i, j))});
    CHECK(dev < 1e-12);
    // the centered difference at the crease node is h/4
    CHECK(cx.at(32, 32) == doctest::Approx(crease.spacing() / 4));

    const ScalarField q = ScalarField::from_function(65, [](double x, double y) { return x * x - 3 * x * y + y; });
    const auto [qx, qy] = fd_gradient_limited(q);
    CHECK(qx.at(40, 20) == doctest::Approx(2 * q.coord(40) - 3 * q.coord(20)).epsilon(1e-10));
    CHECK(qy.at(40, 20) == doctest::Approx(-3 * q.coord(40) + 1).epsilon(1e-10));
  }

  TEST_CASE("difference Laplacian converges at second order") {
    auto error = [](int n) {
      const ScalarField f = ScalarField::from_function(n, smooth);
      const ScalarField lap = fd_laplacian(f);
      double err = 0.0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double x = f.coord(i), y = f.coord(j);
          if (x * x + y * y > 0.64) continue;
          err = std::max(err, std::abs(lap.at(i, j) - (-4.0 + 0.25) * smooth(x, y)));
        }
      return err;
    };
    CHECK(error(65) / error(129) > 3.5);
  }

  TEST_CASE("rescaling removes the tangent plane and magnifies") {
    const ScalarField f = ScalarField::from_function(129, [](double x, double y) { return x * x - 0.5 * x * y + 2 * y + 3; });
    const Eigen::Vector2d y0(0.2, -0.1);
    const Rescaling resc = make_rescaling(f, y0, 0.25);
    CHECK(resc.value_at_y == doctest::Approx(0.04 + 0.01 - 0.2 + 3));
    const ScalarField v = rescale(f, resc, 33);
    // quadratic part x^2 - x y / 2 survives unchanged
    for (int j = 0; j < 33; j += 4)
      for (int i = 0; i < 33; i += 4) {
        if (!v.in_mask(i, j)) continue;
        const double a = v.coord(i), b = v.coord(j);
        CHECK(v.at(i, j) == doctest::Approx(a * a - 0.5 * a * b).epsilon(1e-10));
      }
    CHECK_THROWS_AS(rescale(f, make_rescaling(f, Eigen::Vector2d(0.8, 0.0), 0.3), 33), OutOfDomainError);
  }

  TEST_CASE("CSV and binary round trips are bit-exact") {
    ScalarField f = ScalarField::from_function(17, smooth);
    f.metadata()["origin"] = "unit";
    const auto csv = temp_file("field.csv");
    const auto bin = temp_file("field.bin");
    write_field_csv(f, csv.string());
    write_field_binary(f, bin.string());
    const ScalarField a = read_field_csv(csv.string());
    const ScalarField b = read_field_binary(bin.string());
    CHECK(a.values() == f.values());
    CHECK(b.values() == f.values());
    CHECK(b.metadata().at("origin") == "unit");
    std::filesystem::remove(csv);
    std::filesystem::remove(bin);
  }

  TEST_CASE("grid fields expose interpolated derivatives and an optional source") {
    const ScalarField f = ScalarField::from_function(129, cubic);
    const GridField g(f, [](double, double) { return 42.0; });
    CHECK(g.resolution() == doctest::Approx(f.spacing()));
    CHECK(g.laplacian(0.1, 0.1) == 42.0);
    const Eigen::Matrix2d h = g.hessian(0.1, -0.2);
    CHECK(h(0, 0) == doctest::Approx(1.8 * 0.1 - 2 * -0.2).epsilon(1e-6));
    CHECK(h(0, 1) == doctest::Approx(h(1, 0)));
    const FieldPtr shifted = add_affine(make_grid_field(f), 1.0, Eigen::Vector2d(2.0, -1.0));
    CHECK(shifted->value(0.1, 0.2) == doctest::Approx(cubic(0.1, 0.2) + 1.0 + 0.2 - 0.2).epsilon(1e-12));
    CHECK((shifted->hessian(0.1, 0.2) - g.hessian(0.1, 0.2)).norm() < 1e-12);
  }
}
