#include "semilinear/projections.hpp"

#include <cmath>
#include <numbers>

#include "semilinear/errors.hpp"
#include "semilinear/quadrature.hpp"

namespace semilinear {

namespace {

void fill_norms(ProjectionResult& out) {
  out.l2_sphere = out.element.l2_sphere();
  out.l2_ball = out.element.l2_ball();
  out.sup_b1 = out.element.sup_ball();
}

Eigen::Matrix2d ball_mean_hessian(const DifferentiableField& u, const Eigen::Vector2d& y, double r) {
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  for (const auto& node : default_disk_rule()) sum += node.weight * u.hessian(r * node.x1 + y.x(), r * node.x2 + y.y());
  return sum / std::numbers::pi;
}

double pi_residual(const DifferentiableField& u, const Eigen::Vector2d& y, double r, const Eigen::Matrix2d& hess) {
  double total = 0.0;
  for (const auto& node : default_disk_rule())
    total += node.weight * (u.hessian(r * node.x1 + y.x(), r * node.x2 + y.y()) - hess).squaredNorm();
  return total;
}

double rescaled_value(const DifferentiableField& u, const Rescaling& resc, QVariant variant, double x1, double x2) {
  const double r = resc.radius;
  const Eigen::Vector2d& y = resc.base_point;
  double v = u.value(r * x1 + y.x(), r * x2 + y.y());
  if (variant == QVariant::tangent_removed)
    v -= r * (x1 * resc.gradient_at_y.x() + x2 * resc.gradient_at_y.y()) + resc.value_at_y;
  return v / (r * r);
}

// Circle moments of a function against the basis, then the sphere Gram solve.
template <class Fn>
Eigen::VectorXd sphere_projection_coeffs(const BasisPtr& basis, Fn&& fn, double* self_norm2 = nullptr) {
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
  double norm2 = 0.0;
  for (const auto& node : default_circle_rule()) {
    const double v = fn(node.x1, node.x2);
    norm2 += node.weight * v * v;
    // n = 2 basis: {x1 x2, x1^2 - x2^2}
    moments[0] += node.weight * v * node.x1 * node.x2;
    moments[1] += node.weight * v * (node.x1 * node.x1 - node.x2 * node.x2);
  }
  if (self_norm2) *self_norm2 = norm2;
  return basis->solve_sphere(moments);
}

}  // namespace

nlohmann::json ProjectionResult::to_json() const {
  return {{"y", {base_point.x(), base_point.y()}},
          {"r", radius},
          {"side", side == ProjectionSide::ball_hessian ? "ball_hessian" : "sphere_values"},
          {"coeffs", std::vector<double>(element.coeffs().data(), element.coeffs().data() + element.coeffs().size())},
          {"order_tag", HarmonicBasis::order_tag()},
          {"l2_sphere", l2_sphere},
          {"l2_ball", l2_ball},
          {"sup_B1", sup_b1},
          {"residual", residual}};
}

void check_scale(const DifferentiableField& u, const Eigen::Vector2d& y, double r) {
  const double h = u.resolution();
  if (h > 0.0 && r < kMinScaleInSpacings * h * (1.0 - 1e-12)) throw UnderResolvedScaleError(r, h);
  if (!(r > 0.0) || r > 1.0 - y.norm() + 1e-12) throw OutOfDomainError("ball B_r(y) leaves the unit disk");
}

Rescaling rescaling_at(const DifferentiableField& u, const Eigen::Vector2d& y, double r) {
  Rescaling resc;
  resc.base_point = y;
  resc.radius = r;
  resc.value_at_y = u.value(y.x(), y.y());
  resc.gradient_at_y = u.gradient(y.x(), y.y());
  return resc;
}

ProjectionResult pi_projection(const DifferentiableField& u, const Rescaling& resc) {
  const Eigen::Vector2d& y = resc.base_point;
  const double r = resc.radius;
  check_scale(u, y, r);
  const Eigen::Matrix2d mean = ball_mean_hessian(u, y, r);
  const Eigen::Matrix2d trace_free = mean - 0.5 * mean.trace() * Eigen::Matrix2d::Identity();
  ProjectionResult out;
  out.element = P2Element::from_matrix(basis_for(2), 0.5 * trace_free);
  out.base_point = y;
  out.radius = r;
  out.side = ProjectionSide::ball_hessian;
  out.residual = pi_residual(u, y, r, trace_free);
  fill_norms(out);
  return out;
}

ProjectionResult pi_projection(const DifferentiableField& u, const Eigen::Vector2d& y, double r) {
  return pi_projection(u, rescaling_at(u, y, r));
}

ProjectionResult pi_projection_gram(const DifferentiableField& u, const Eigen::Vector2d& y, double r) {
  check_scale(u, y, r);
  const auto basis = basis_for(2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
  for (const auto& node : default_disk_rule()) {
    const Eigen::Matrix2d hess = u.hessian(r * node.x1 + y.x(), r * node.x2 + y.y());
    for (std::size_t k = 0; k < basis->size(); ++k)
      rhs[static_cast<Eigen::Index>(k)] += node.weight * (hess.cwiseProduct(2.0 * basis->element(k))).sum();
  }
  ProjectionResult out;
  out.element = P2Element(basis, basis->solve_ball(rhs));
  out.base_point = y;
  out.radius = r;
  out.side = ProjectionSide::ball_hessian;
  out.residual = pi_residual(u, y, r, out.element.hessian());
  fill_norms(out);
  return out;
}

ProjectionResult q_projection(const DifferentiableField& u, const Rescaling& resc, QVariant variant) {
  check_scale(u, resc.base_point, resc.radius);
  const auto basis = basis_for(2);
  double norm2 = 0.0;
  const Eigen::VectorXd c = sphere_projection_coeffs(
      basis, [&](double x1, double x2) { return rescaled_value(u, resc, variant, x1, x2); }, &norm2);
  ProjectionResult out;
  out.element = P2Element(basis, c);
  out.base_point = resc.base_point;
  out.radius = resc.radius;
  out.side = ProjectionSide::sphere_values;
  out.residual = std::max(0.0, norm2 - c.dot(basis->gram_sphere() * c));
  fill_norms(out);
  return out;
}

ProjectionResult q_projection(const DifferentiableField& u, const Eigen::Vector2d& y, double r, QVariant variant) {
  return q_projection(u, rescaling_at(u, y, r), variant);
}

P2Element q_derivative(const DifferentiableField& u, const Eigen::Vector2d& y, double r) {
  check_scale(u, y, r);
  const auto basis = basis_for(2);
  const double inv_r3 = 1.0 / (r * r * r);
  const Eigen::VectorXd c = sphere_projection_coeffs(basis, [&](double x1, double x2) {
    const double p1 = r * x1 + y.x();
    const double p2 = r * x2 + y.y();
    const Eigen::Vector2d g = u.gradient(p1, p2);
    return (r * (x1 * g.x() + x2 * g.y()) - 2.0 * u.value(p1, p2)) * inv_r3;
  });
  return P2Element(basis, c);
}

double energy_derivative(const DifferentiableField& u, const Eigen::Vector2d& y, double r) {
  const ProjectionResult q = q_projection(u, y, r);
  double total = 0.0;
  for (const auto& node : default_disk_rule())
    total += node.weight * q.element(node.x1, node.x2) * u.laplacian(r * node.x1 + y.x(), r * node.x2 + y.y());
  return 2.0 / r * total;
}

std::pair<double, double> integration_identity_check(const DifferentiableField& u, const P2Element& q,
                                                     const Eigen::Vector2d& y) {
  double lhs = 0.0;
  for (const auto& node : default_disk_rule())
    lhs += node.weight * q(node.x1, node.x2) * u.laplacian(node.x1 + y.x(), node.x2 + y.y());
  double rhs = 0.0;
  for (const auto& node : default_circle_rule()) {
    const double p1 = node.x1 + y.x();
    const double p2 = node.x2 + y.y();
    const Eigen::Vector2d g = u.gradient(p1, p2);
    rhs += node.weight * q(node.x1, node.x2) * (node.x1 * g.x() + node.x2 * g.y() - 2.0 * u.value(p1, p2));
  }
  return {lhs, rhs};
}

std::vector<double> pi_q_gap(const DifferentiableField& u, const Eigen::Vector2d& y, const std::vector<double>& radii) {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    const auto resc = rescaling_at(u, y, r);
    out.push_back((q_projection(u, resc).element - pi_projection(u, resc).element).sup_ball());
  }
  return out;
}

double sphere_norm_of_rescaling(const DifferentiableField& u, const Rescaling& resc, QVariant variant) {
  double norm2 = 0.0;
  for (const auto& node : default_circle_rule()) {
    const double v = rescaled_value(u, resc, variant, node.x1, node.x2);
    norm2 += node.weight * v * v;
  }
  return std::sqrt(norm2);
}

}  // namespace semilinear
