#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "semilinear/errors.hpp"
#include "semilinear/harmonic_space.hpp"
#include "semilinear/quadrature.hpp"

using namespace semilinear;

namespace {

constexpr double kPi = std::numbers::pi;

// Three-point Gauss-Hermite rule: exact for degree <= 5 per coordinate
// against exp(-x^2).
const double kGhNodes[3] = {-std::sqrt(1.5), 0.0, std::sqrt(1.5)};
const double kGhWeights[3] = {std::sqrt(kPi) / 6.0, 2.0 * std::sqrt(kPi) / 3.0, std::sqrt(kPi) / 6.0};

// For p homogeneous of degree 4: int_{R^n} p e^{-|x|^2} = Gamma((n+4)/2)/2 * int_S p.
double sphere_integral_deg4(int n, const std::function<double(const Eigen::VectorXd&)>& p) {
  double total = 0.0;
  std::vector<int> idx(n, 0);
  Eigen::VectorXd x(n);
  while (true) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      x[d] = kGhNodes[idx[d]];
      w *= kGhWeights[idx[d]];
    }
    total += w * p(x);
    int d = 0;
    while (d < n && ++idx[d] == 3) idx[d++] = 0;
    if (d == n) break;
  }
  return total * 2.0 / std::tgamma((n + 4) / 2.0);
}

}  // namespace

TEST_SUITE("harmonic_space") {
  TEST_CASE("dimension is n(n+1)/2 - 1 and n < 2 is rejected") {
    for (int n = 2; n <= 6; ++n) CHECK(build_basis(n)->size() == static_cast<std::size_t>(n * (n + 1) / 2 - 1));
    CHECK_THROWS_AS(build_basis(1), InvalidDimensionError);
    CHECK(basis_for(3) == basis_for(3));
  }

  TEST_CASE("basis elements are symmetric and trace-free in the fixed order") {
    const auto b = build_basis(3);
    for (const auto& a : b->elements()) {
      CHECK(std::abs(a.trace()) < 1e-15);
      CHECK((a - a.transpose()).norm() == 0.0);
    }
    // x1x2, x1x3, x2x3, then x1^2 - x2^2, x2^2 - x3^2
    CHECK(b->element(0)(0, 1) == doctest::Approx(0.5));
    CHECK(b->element(2)(1, 2) == doctest::Approx(0.5));
    CHECK(b->element(3)(0, 0) == 1.0);
    CHECK(b->element(4)(2, 2) == -1.0);
  }

  TEST_CASE("sphere and ball measures") {
    CHECK(unit_sphere_area(2) == doctest::Approx(2 * kPi));
    CHECK(unit_sphere_area(3) == doctest::Approx(4 * kPi));
    CHECK(unit_ball_volume(2) == doctest::Approx(kPi));
    CHECK(unit_ball_volume(3) == doctest::Approx(4 * kPi / 3));
    const int e2[] = {2, 0};
    const int e3[] = {2, 0, 0};
    const int odd[] = {1, 1};
    CHECK(sphere_monomial_moment(e2) == doctest::Approx(kPi));
    CHECK(sphere_monomial_moment(e3) == doctest::Approx(4 * kPi / 3));
    CHECK(sphere_monomial_moment(odd) == 0.0);
  }

  TEST_CASE("planar Gram entries on the circle are pi/4 and pi") {
    const auto b = basis_for(2);
    CHECK(b->gram_sphere()(0, 0) == doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(b->gram_sphere()(1, 1) == doctest::Approx(kPi).epsilon(1e-14));
    CHECK(std::abs(b->gram_sphere()(0, 1)) < 1e-15);
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (const auto& node : circle_rule(512)) {
      const double q0 = node.x1 * node.x2, q1 = node.x1 * node.x1 - node.x2 * node.x2;
      g(0, 0) += node.weight * q0 * q0;
      g(1, 1) += node.weight * q1 * q1;
      g(0, 1) += node.weight * q0 * q1;
    }
    g(1, 0) = g(0, 1);
    CHECK((g - b->gram_sphere()).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("sphere Gram matches Gauss-Hermite moments for n = 3..6") {
    for (int n = 3; n <= 6; ++n) {
      const auto b = build_basis(n);
      double dev = 0.0;
      for (std::size_t i = 0; i < b->size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          const Eigen::MatrixXd& ai = b->element(i);
          const Eigen::MatrixXd& aj = b->element(j);
          const double oracle = sphere_integral_deg4(n, [&](const Eigen::VectorXd& x) {
            return x.dot(ai * x) * x.dot(aj * x);
          });
          dev = std::max(dev, std::abs(oracle - b->gram_sphere()(i, j)));
        }
      CHECK(dev < 1e-10);
    }
  }

  TEST_CASE("ball Gram equals |B1| times products of constant Hessians") {
    for (int n = 2; n <= 5; ++n) {
      const auto b = build_basis(n);
      for (std::size_t i = 0; i < b->size(); ++i)
        for (std::size_t j = 0; j < b->size(); ++j) {
          const double oracle = unit_ball_volume(n) * (2.0 * b->element(i)).cwiseProduct(2.0 * b->element(j)).sum();
          CHECK(b->gram_ball()(i, j) == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
  }

  TEST_CASE("planar norm equivalence is an isometry up to 1/(2 sqrt 2)") {
    // both norms are rotation invariant on the two-dimensional space
    const NormEquivalence ne = norm_equivalence_constants(*basis_for(2));
    CHECK(ne.c_low == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-12));
    CHECK(ne.c_high == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-12));
  }

  TEST_CASE("norm equivalence bounds hold for random elements") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int n = 2; n <= 5; ++n) {
      const auto b = basis_for(n);
      const NormEquivalence ne = norm_equivalence_constants(*b);
      CHECK(ne.c_low <= ne.c_high);
      for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd c(static_cast<Eigen::Index>(b->size()));
        for (auto& v : c) v = g(rng);
        const P2Element q(b, c);
        const double ratio = q.l2_sphere() / q.l2_ball();
        CHECK(ratio >= ne.c_low * (1 - 1e-12));
        CHECK(ratio <= ne.c_high * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("assemble and coefficients_of are inverse; trace part is dropped") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int n = 2; n <= 6; ++n) {
      const auto b = basis_for(n);
      Eigen::VectorXd c(static_cast<Eigen::Index>(b->size()));
      for (auto& v : c) v = u(rng);
      CHECK((b->coefficients_of(b->assemble(c)) - c).norm() < 1e-13);
      const Eigen::MatrixXd shifted = b->assemble(c) + 0.7 * Eigen::MatrixXd::Identity(n, n);
      CHECK((b->coefficients_of(shifted) - c).norm() < 1e-13);
    }
  }

  TEST_CASE("P2Element evaluation, norms and sup over the ball") {
    const auto b = basis_for(2);
    const P2Element q(b, Eigen::Vector2d(2.0, 1.0));  // 2 x1 x2 + x1^2 - x2^2
    CHECK(q(0.3, -0.4) == doctest::Approx(2 * 0.3 * -0.4 + 0.09 - 0.16));
    CHECK(q.sup_ball() == doctest::Approx(std::sqrt(2.0)));
    const Eigen::Vector2d c = q.coeffs();
    CHECK(q.l2_sphere() == doctest::Approx(std::sqrt(c.dot(b->gram_sphere() * c))));
    CHECK(q.hessian().trace() == doctest::Approx(0.0));
    const auto vals = eval_p2(q, {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)});
    CHECK(vals[0] == doctest::Approx(1.0));
    CHECK(vals[1] == doctest::Approx(-1.0));
    CHECK_THROWS_AS(eval_p2(q, {Eigen::Vector3d(1, 0, 0)}), InvalidDimensionError);
    CHECK(((q + q) - q * 2.0).sup_ball() == 0.0);
  }

  TEST_CASE("serialization round trip is exact") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int n = 2; n <= 4; ++n) {
      const auto b = basis_for(n);
      Eigen::VectorXd c(static_cast<Eigen::Index>(b->size()));
      for (auto& v : c) v = u(rng) / 3.0;
      const P2Element q(b, c);
      const P2Element back = deserialize_p2(serialize_p2(q));
      CHECK(back.dim_ambient() == n);
      CHECK((back.coeffs() - c).norm() == 0.0);
    }
  }
}
