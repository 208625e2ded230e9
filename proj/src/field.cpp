#include "semilinear/field.hpp"

#include <sstream>

#include "semilinear/errors.hpp"

namespace semilinear {

namespace {

std::string under_resolved_message(double radius, double spacing) {
  std::ostringstream msg;
  msg << "scale r=" << radius << " is below 8h with h=" << spacing;
  return msg.str();
}

class AffineShift final : public DifferentiableField {
 public:
  AffineShift(FieldPtr base, double a0, Eigen::Vector2d a) : base_(std::move(base)), a0_(a0), a_(a) {}
  double value(double x1, double x2) const override { return base_->value(x1, x2) + a0_ + a_.x() * x1 + a_.y() * x2; }
  Eigen::Vector2d gradient(double x1, double x2) const override { return base_->gradient(x1, x2) + a_; }
  Eigen::Matrix2d hessian(double x1, double x2) const override { return base_->hessian(x1, x2); }
  double laplacian(double x1, double x2) const override { return base_->laplacian(x1, x2); }
  double resolution() const override { return base_->resolution(); }

 private:
  FieldPtr base_;
  double a0_;
  Eigen::Vector2d a_;
};

}  // namespace

UnderResolvedScaleError::UnderResolvedScaleError(double radius, double spacing)
    : Error(under_resolved_message(radius, spacing)), radius_(radius), spacing_(spacing) {}

AnalyticField::AnalyticField(Value value, Gradient gradient, Hessian hessian, Value laplacian)
    : value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)),
      laplacian_(std::move(laplacian)) {}

double AnalyticField::laplacian(double x1, double x2) const {
  return laplacian_ ? laplacian_(x1, x2) : hessian_(x1, x2).trace();
}

ScalarField AnalyticField::to_grid(int grid_size) const { return ScalarField::from_function(grid_size, value_); }

GridField::GridField(ScalarField field, std::function<double(double, double)> laplacian_source)
    : field_(std::move(field)),
      grad_(fd_gradient_limited(field_)),
      hess_(fd_hessian(field_)),
      laplacian_source_(std::move(laplacian_source)) {}

Eigen::Vector2d GridField::gradient(double x1, double x2) const {
  return {grad_.first.interpolate(x1, x2), grad_.second.interpolate(x1, x2)};
}

Eigen::Matrix2d GridField::hessian(double x1, double x2) const {
  const double xy = hess_[1].interpolate(x1, x2);
  Eigen::Matrix2d h;
  h << hess_[0].interpolate(x1, x2), xy, xy, hess_[3].interpolate(x1, x2);
  return h;
}

double GridField::laplacian(double x1, double x2) const {
  if (laplacian_source_) return laplacian_source_(x1, x2);
  return hess_[0].interpolate(x1, x2) + hess_[3].interpolate(x1, x2);
}

FieldPtr make_grid_field(ScalarField field, std::function<double(double, double)> laplacian_source) {
  return std::make_shared<GridField>(std::move(field), std::move(laplacian_source));
}

FieldPtr add_affine(FieldPtr base, double a0, const Eigen::Vector2d& a) {
  return std::make_shared<AffineShift>(std::move(base), a0, a);
}

FieldPtr quadratic_field(double a11, double a12, double a22) {
  Eigen::Matrix2d hess;
  hess << 2.0 * a11, 2.0 * a12, 2.0 * a12, 2.0 * a22;
  return std::make_shared<AnalyticField>(
      [=](double x1, double x2) { return a11 * x1 * x1 + 2.0 * a12 * x1 * x2 + a22 * x2 * x2; },
      [=](double x1, double x2) {
        return Eigen::Vector2d(2.0 * a11 * x1 + 2.0 * a12 * x2, 2.0 * a12 * x1 + 2.0 * a22 * x2);
      },
      [=](double, double) { return hess; });
}

}  // namespace semilinear
