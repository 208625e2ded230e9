#pragma once

// Pointwise access to u, grad u, D^2 u and Delta u, independent of whether u
// is a closed-form expression or a gridded solution. Projections and
// diagnostics consume this interface.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>

#include "semilinear/field_grid.hpp"

namespace semilinear {

class DifferentiableField {
 public:
  virtual ~DifferentiableField() = default;
  virtual double value(double x1, double x2) const = 0;
  virtual Eigen::Vector2d gradient(double x1, double x2) const = 0;
  virtual Eigen::Matrix2d hessian(double x1, double x2) const = 0;
  virtual double laplacian(double x1, double x2) const { return hessian(x1, x2).trace(); }
  /// Grid spacing limiting the smallest usable scale; 0 for exact fields.
  virtual double resolution() const = 0;
};

using FieldPtr = std::shared_ptr<const DifferentiableField>;

class AnalyticField final : public DifferentiableField {
 public:
  using Value = std::function<double(double, double)>;
  using Gradient = std::function<Eigen::Vector2d(double, double)>;
  using Hessian = std::function<Eigen::Matrix2d(double, double)>;

  AnalyticField(Value value, Gradient gradient, Hessian hessian, Value laplacian = nullptr);

  double value(double x1, double x2) const override { return value_(x1, x2); }
  Eigen::Vector2d gradient(double x1, double x2) const override { return gradient_(x1, x2); }
  Eigen::Matrix2d hessian(double x1, double x2) const override { return hessian_(x1, x2); }
  double laplacian(double x1, double x2) const override;
  double resolution() const override { return 0.0; }

  /// Grid samples of the value at every node of an N x N grid.
  ScalarField to_grid(int grid_size) const;

 private:
  Value value_;
  Gradient gradient_;
  Hessian hessian_;
  Value laplacian_;
};

/// Bicubic interpolant of a ScalarField. Gradients interpolate the cached
/// limited node gradients (fd_gradient_limited), so a crease of u at a node
/// does not bias the gradient there. Hessians interpolate the cached
/// finite-difference Hessian fields; the Laplacian can be overridden by a
/// known source term (e.g. the solver right-hand side evaluated at the point).
class GridField final : public DifferentiableField {
 public:
  explicit GridField(ScalarField field, std::function<double(double, double)> laplacian_source = nullptr);

  double value(double x1, double x2) const override { return field_.interpolate(x1, x2); }
  Eigen::Vector2d gradient(double x1, double x2) const override;
  Eigen::Matrix2d hessian(double x1, double x2) const override;
  double laplacian(double x1, double x2) const override;
  double resolution() const override { return field_.spacing(); }

  const ScalarField& field() const { return field_; }

 private:
  ScalarField field_;
  std::pair<ScalarField, ScalarField> grad_;
  std::array<ScalarField, 4> hess_;
  std::function<double(double, double)> laplacian_source_;
};

FieldPtr make_grid_field(ScalarField field, std::function<double(double, double)> laplacian_source = nullptr);

/// u + a0 + a . x, preserving derivatives exactly.
FieldPtr add_affine(FieldPtr base, double a0, const Eigen::Vector2d& a);

/// Polynomial helpers with exact derivatives, used by catalog entries and tests.
FieldPtr quadratic_field(double a11, double a12, double a22);

}  // namespace semilinear
