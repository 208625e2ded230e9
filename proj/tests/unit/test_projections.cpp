#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../support/poly_field.hpp"
#include "semilinear/errors.hpp"
#include "semilinear/projections.hpp"
#include "semilinear/quadrature.hpp"

using namespace semilinear;
using testing_support::Poly;

namespace {

constexpr double kPi = std::numbers::pi;

Poly random_poly(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> u(-1, 1);
  Poly p;
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; i + j <= degree; ++j) p.add(i, j, u(rng));
  return p;
}

double laplacian_l2(const DifferentiableField& f) {
  double s = 0.0;
  for (const auto& node : default_disk_rule()) s += node.weight * std::pow(f.laplacian(node.x1, node.x2), 2);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("projections") {
  TEST_CASE("fixed points: elements of P2 project to themselves") {
    const FieldPtr q = Poly().add(1, 1, 0.7).add(2, 0, -0.4).add(0, 2, 0.4).field();
    for (double r : {1.0, 0.25, 0.03125}) {
      const ProjectionResult pi = pi_projection(*q, Eigen::Vector2d::Zero(), r);
      const ProjectionResult qq = q_projection(*q, Eigen::Vector2d::Zero(), r);
      CHECK(pi.element.coeffs()[0] == doctest::Approx(0.7).epsilon(1e-10));
      CHECK(pi.element.coeffs()[1] == doctest::Approx(-0.4).epsilon(1e-10));
      CHECK((qq.element - pi.element).sup_ball() < 1e-8);
      CHECK(pi.residual == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  TEST_CASE("pure trace and affine parts are annihilated") {
    const FieldPtr bowl = Poly().add(2, 0, 1).add(0, 2, 1).field();
    CHECK(pi_projection(*bowl, Eigen::Vector2d::Zero(), 0.5).sup_b1 < 1e-12);
    const FieldPtr affine = Poly().add(0, 0, 3).add(1, 0, -2).add(0, 1, 0.5).field();
    for (QVariant v : {QVariant::raw, QVariant::tangent_removed}) {
      CHECK(q_projection(*affine, Eigen::Vector2d(0.1, 0.2), 0.3, v).sup_b1 < 1e-9);
    }
    CHECK(pi_projection(*affine, Eigen::Vector2d(0.1, 0.2), 0.3).sup_b1 < 1e-9);
  }

  TEST_CASE("norms agree with the Gram matrices") {
    const FieldPtr u = Poly().add(3, 0, 1).add(1, 2, -0.5).add(1, 1, 2).field();
    const ProjectionResult q = q_projection(*u, Eigen::Vector2d(0.1, -0.2), 0.25);
    const auto& b = *q.element.basis();
    const Eigen::VectorXd c = q.element.coeffs();
    CHECK(q.l2_sphere == doctest::Approx(std::sqrt(c.dot(b.gram_sphere() * c))).epsilon(1e-10));
    CHECK(q.l2_ball == doctest::Approx(std::sqrt(c.dot(b.gram_ball() * c))).epsilon(1e-10));
    CHECK(q.residual >= 0.0);
  }

  TEST_CASE("closed-form Pi agrees with the Gram-system path") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k) {
      const FieldPtr u = random_poly(rng, 4).field();
      const Eigen::Vector2d y(0.1 * k / 10.0, -0.05);
      const auto a = pi_projection(*u, y, 0.2).element;
      const auto b = pi_projection_gram(*u, y, 0.2).element;
      CHECK((a - b).sup_ball() < 1e-10);
    }
  }

  TEST_CASE("Q is linear and scale invariant for harmonic fields") {
    const auto [re3, im3] = testing_support::harmonic_pair(3);
    const auto [re4, im4] = testing_support::harmonic_pair(4);
    const Poly h = re3 + im4 * 0.5 + Poly().add(1, 1, 1.0);
    const FieldPtr u = h.field();
    const Eigen::Vector2d y(0.2, 0.1);
    const P2Element ref = q_projection(*u, y, 0.25).element;
    for (double s : {0.125, 0.0625, 0.03125}) CHECK((q_projection(*u, y, s).element - ref).sup_ball() < 1e-7);

    const FieldPtr a = re3.field();
    const FieldPtr b = Poly().add(4, 0, 1).add(1, 1, -2).field();
    const FieldPtr sum = (re3 * 2.0 + Poly().add(4, 0, -3).add(1, 1, 6)).field();
    const P2Element lhs = q_projection(*sum, y, 0.2).element;
    const P2Element rhs = q_projection(*a, y, 0.2).element * 2.0 - q_projection(*b, y, 0.2).element * 3.0;
    CHECK((lhs - rhs).sup_ball() < 1e-10);
  }

  TEST_CASE("contraction: |Q_0(u,1)| <= |u| on the circle") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) {
      const FieldPtr u = random_poly(rng, 5).field();
      const Rescaling resc = rescaling_at(*u, Eigen::Vector2d::Zero(), 1.0);
      const double qn = q_projection(*u, resc, QVariant::raw).l2_sphere;
      CHECK(qn <= sphere_norm_of_rescaling(*u, resc, QVariant::raw) + 1e-10);
    }
  }

  TEST_CASE("Q of x1^4 is r^2 (x1^2 - x2^2)/2 with derivative r (x1^2 - x2^2)") {
    const FieldPtr u = Poly().add(4, 0, 1).field();
    for (double r : {0.5, 0.25, 0.1}) {
      const P2Element q = q_projection(*u, Eigen::Vector2d::Zero(), r).element;
      CHECK(q.coeffs()[1] == doctest::Approx(0.5 * r * r).epsilon(1e-12));
      CHECK(std::abs(q.coeffs()[0]) < 1e-14);
      const P2Element dq = q_derivative(*u, Eigen::Vector2d::Zero(), r);
      CHECK(dq.coeffs()[1] == doctest::Approx(r).epsilon(1e-10));
      // d/dr |Q|^2 = d/dr (pi r^4 / 4) = pi r^3
      CHECK(energy_derivative(*u, Eigen::Vector2d::Zero(), r) == doctest::Approx(kPi * r * r * r).epsilon(1e-10));
    }
  }

  TEST_CASE("derivative formulas match centered differences in r") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 10; ++k) {
      const FieldPtr u = random_poly(rng, 5).field();
      const Eigen::Vector2d y(0.15, -0.1);
      const double r = 0.3;
      const double d = r / 1000.0;
      const P2Element fd =
          (q_projection(*u, y, r + d).element - q_projection(*u, y, r - d).element) * (0.5 / d);
      const P2Element dq = q_derivative(*u, y, r);
      CHECK((fd - dq).sup_ball() <= 1e-3 * std::max(1.0, dq.sup_ball()));
      const double t2p = std::pow(q_projection(*u, y, r + d).l2_sphere, 2);
      const double t2m = std::pow(q_projection(*u, y, r - d).l2_sphere, 2);
      const double e = energy_derivative(*u, y, r);
      CHECK(std::abs((t2p - t2m) / (2 * d) - e) <= 1e-3 * std::max(1.0, std::abs(e)));
    }
  }

  TEST_CASE("integration identity: x1^4 against x1^2 - x2^2 gives pi on both sides") {
    const FieldPtr u = Poly().add(4, 0, 1).field();
    const P2Element q(basis_for(2), Eigen::Vector2d(0.0, 1.0));
    const auto [lhs, rhs] = integration_identity_check(*u, q, Eigen::Vector2d::Zero());
    CHECK(lhs == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(rhs == doctest::Approx(kPi).epsilon(1e-12));
    const FieldPtr bowl = Poly().add(2, 0, 1).add(0, 2, 1).field();
    const P2Element xy(basis_for(2), Eigen::Vector2d(1.0, 0.0));
    const auto [l2, r2] = integration_identity_check(*bowl, xy, Eigen::Vector2d::Zero());
    CHECK(std::abs(l2) < 1e-8);
    CHECK(std::abs(r2) < 1e-8);
  }

  TEST_CASE("difference bound against |Delta u| holds with one fitted constant") {
    std::mt19937_64 rng(33);
    double c_fit = 0.0;
    double harmonic_dev = 0.0;
    for (int k = 0; k < 100; ++k) {
      const bool harmonic = k % 5 == 0;
      Poly p = random_poly(rng, 4);
      if (harmonic) {
        const auto [re, im] = testing_support::harmonic_pair(2 + k % 3);
        p = re + im * 0.3 + Poly().add(1, 0, 0.2);
      }
      const FieldPtr u = p.field();
      const double s = 0.5 + 0.5 * (k % 7) / 7.0;
      const double dq = (q_projection(*u, Eigen::Vector2d::Zero(), s).element -
                         q_projection(*u, Eigen::Vector2d::Zero(), 1.0).element).l2_sphere();
      const double dp = (pi_projection(*u, Eigen::Vector2d::Zero(), s).element -
                         pi_projection(*u, Eigen::Vector2d::Zero(), 1.0).element).l2_ball();
      const double lap = laplacian_l2(*u);
      if (harmonic) {
        harmonic_dev = std::max(harmonic_dev, std::max(dq, dp));
      } else {
        c_fit = std::max(c_fit, std::max(dq, dp) / lap);
      }
    }
    CHECK(harmonic_dev < 1e-7);
    CHECK(c_fit > 0.0);
    CHECK(c_fit < 10.0);
  }

  TEST_CASE("Pi-Q gap vanishes on P2 and is constant in r for harmonic fields") {
    const FieldPtr q = Poly().add(1, 1, 1).field();
    for (double g : pi_q_gap(*q, Eigen::Vector2d(0.1, 0.1), {0.25, 0.125})) CHECK(g < 1e-10);
    const auto [re, im] = testing_support::harmonic_pair(3);
    const FieldPtr h = (re + Poly().add(2, 0, 1).add(0, 2, -1)).field();
    const auto gaps = pi_q_gap(*h, Eigen::Vector2d(0.2, 0.0), {0.25, 0.125, 0.0625, 0.03125});
    for (double g : gaps) CHECK(std::abs(g - gaps.front()) < 1e-6);
  }

  TEST_CASE("scale checks") {
    const ScalarField grid = ScalarField::from_function(65, [](double x, double y) { return x * y; });
    const GridField f(grid);
    CHECK_THROWS_AS(check_scale(f, Eigen::Vector2d::Zero(), 4 * grid.spacing()), UnderResolvedScaleError);
    CHECK_THROWS_AS(check_scale(f, Eigen::Vector2d(0.9, 0.0), 0.3), OutOfDomainError);
    CHECK_NOTHROW(check_scale(f, Eigen::Vector2d::Zero(), 8 * grid.spacing()));
  }

  TEST_CASE("projection result serializes with its base point and radius") {
    const FieldPtr u = Poly().add(1, 1, 1).field();
    const auto j = pi_projection(*u, Eigen::Vector2d(0.1, 0.0), 0.2).to_json();
    CHECK(j.contains("y"));
    CHECK(j["r"].get<double>() == doctest::Approx(0.2));
  }
}
