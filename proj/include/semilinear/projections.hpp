#pragma once

// The projections Pi_y(u, r) (Hessian least squares over the unit ball) and
// Q_y(u, r) (value least squares over the unit circle) of the rescaled field
// x -> u(rx + y) / r^2, together with their scale calculus.

#include <Eigen/Dense>
#include <json.hpp>
#include <utility>
#include <vector>

#include "semilinear/field.hpp"
#include "semilinear/field_grid.hpp"
#include "semilinear/harmonic_space.hpp"

namespace semilinear {

enum class ProjectionSide { ball_hessian, sphere_values };

/// tangent_removed projects (u(rx+y) - r x.grad u(y) - u(y)) / r^2; raw
/// projects u(rx+y) / r^2. Affine parts are annihilated on the circle, so the
/// two agree up to quadrature rounding.
enum class QVariant { tangent_removed, raw };

struct ProjectionResult {
  P2Element element;
  Eigen::Vector2d base_point = Eigen::Vector2d::Zero();
  double radius = 1.0;
  ProjectionSide side = ProjectionSide::ball_hessian;
  double l2_sphere = 0.0;
  double l2_ball = 0.0;
  double sup_b1 = 0.0;
  double residual = 0.0;  // minimized squared distance

  nlohmann::json to_json() const;
};

/// Smallest admissible radius is 8 times the field resolution.
constexpr double kMinScaleInSpacings = 8.0;

/// Throws UnderResolvedScaleError for r < 8h and OutOfDomainError when
/// B_r(y) leaves the unit disk.
void check_scale(const DifferentiableField& u, const Eigen::Vector2d& y, double r);

/// Rescaling carrying u(y) and grad u(y) from the field itself.
Rescaling rescaling_at(const DifferentiableField& u, const Eigen::Vector2d& y, double r);

/// Closed form: twice the coefficient matrix equals the trace-free part of the
/// ball mean of D^2 u(rx + y).
ProjectionResult pi_projection(const DifferentiableField& u, const Rescaling& resc);
ProjectionResult pi_projection(const DifferentiableField& u, const Eigen::Vector2d& y, double r);
/// The same minimizer obtained from the ball Gram system (cross-check path).
ProjectionResult pi_projection_gram(const DifferentiableField& u, const Eigen::Vector2d& y, double r);

ProjectionResult q_projection(const DifferentiableField& u, const Rescaling& resc,
                              QVariant variant = QVariant::tangent_removed);
ProjectionResult q_projection(const DifferentiableField& u, const Eigen::Vector2d& y, double r,
                              QVariant variant = QVariant::tangent_removed);

/// dQ/dr = (1/r^3) Proj_circle(r x.grad u(rx+y) - 2 u(rx+y)).
P2Element q_derivative(const DifferentiableField& u, const Eigen::Vector2d& y, double r);

/// (2/r) * integral over B1 of Q_y(u,r)(x) Delta u(rx + y); equals the
/// r-derivative of the squared circle norm of Q.
double energy_derivative(const DifferentiableField& u, const Eigen::Vector2d& y, double r);

/// Both sides of: integral_B1 q Delta u(x+y) = integral_dB1 q (x.grad u(x+y) - 2u(x+y)),
/// each by its own quadrature.
std::pair<double, double> integration_identity_check(const DifferentiableField& u, const P2Element& q,
                                                     const Eigen::Vector2d& y);

/// sup over B1 of |Q_y(u,r) - Pi_y(u,r)| per radius.
std::vector<double> pi_q_gap(const DifferentiableField& u, const Eigen::Vector2d& y, const std::vector<double>& radii);

/// Circle L2 norm of x -> u(rx+y)/r^2 (contraction bound for Q).
double sphere_norm_of_rescaling(const DifferentiableField& u, const Rescaling& resc, QVariant variant);

}  // namespace semilinear
