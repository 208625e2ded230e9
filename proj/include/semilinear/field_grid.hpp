#pragma once

// Uniform Cartesian fields on [-1,1]^2 with the closed unit disk as mask.
//
// Values are stored on every node of the square. Nodes outside the disk hold
// extension values (exact samples for analytic fields, extrapolated ghosts for
// solver output) so that interpolation and difference stencils near the circle
// never read undefined data.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace semilinear {

using PointFunction = std::function<double(double, double)>;

class ScalarField {
 public:
  ScalarField() = default;
  /// Zero field. Throws InvalidDimensionError unless N is odd and >= 5.
  explicit ScalarField(int grid_size);

  static ScalarField from_function(int grid_size, const PointFunction& fn);

  int dim_ambient() const { return 2; }
  int grid_size() const { return n_; }
  double spacing() const { return h_; }
  double coord(int i) const { return -1.0 + h_ * i; }
  bool in_mask(int i, int j) const;

  double& at(int i, int j) { return values_[static_cast<std::size_t>(j) * n_ + i]; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * n_ + i]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  /// Bicubic (4x4 tensor Lagrange) interpolation anywhere in the square.
  /// Reproduces cubics exactly and node values bit-for-bit.
  double interpolate(double x1, double x2) const;
  /// Gradient of the bicubic interpolant.
  Eigen::Vector2d interpolate_gradient(double x1, double x2) const;

  /// max |value| over mask nodes.
  double sup_norm() const;

 private:
  int n_ = 0;
  double h_ = 0.0;
  std::vector<double> values_;
  std::map<std::string, std::string> metadata_;
};

/// Bicubic sampling; throws OutOfDomainError for points outside the closed disk.
std::vector<double> sample(const ScalarField& field, const std::vector<Eigen::Vector2d>& points);
double sample(const ScalarField& field, double x1, double x2);

/// Parabolic rescaling data: base point y, radius r, and the tangent plane at y.
struct Rescaling {
  Eigen::Vector2d base_point = Eigen::Vector2d::Zero();
  double radius = 1.0;
  Eigen::Vector2d gradient_at_y = Eigen::Vector2d::Zero();
  double value_at_y = 0.0;
};

/// Rescaling with value and gradient taken from the bicubic interpolant at y.
Rescaling make_rescaling(const ScalarField& field, const Eigen::Vector2d& y, double r);

/// (u(rx+y) - r x.grad u(y) - u(y)) / r^2 sampled on an out_size grid.
/// Throws OutOfDomainError unless r <= 1 - |y| and r > 0.
ScalarField rescale(const ScalarField& field, const Rescaling& resc, int out_size = 129);

/// Centered second-order differences; one-sided second-order stencils where a
/// centered neighbour would leave the mask.
std::pair<ScalarField, ScalarField> fd_gradient(const ScalarField& field);
/// Median of the centered and both one-sided three-point differences where all
/// three fit, fd_gradient elsewhere. Exact for piecewise quadratics with one
/// crease inside the stencil, second order on smooth data.
std::pair<ScalarField, ScalarField> fd_gradient_limited(const ScalarField& field);
/// Components in the order xx, xy, yx, yy.
std::array<ScalarField, 4> fd_hessian(const ScalarField& field);
ScalarField fd_laplacian(const ScalarField& field);

/// Reads the JSON header + CSV body written by write_field_csv.
void write_field_csv(const ScalarField& field, const std::string& path);
ScalarField read_field_csv(const std::string& path);
/// Header line (JSON) followed by N*N little-endian doubles.
void write_field_binary(const ScalarField& field, const std::string& path);
ScalarField read_field_binary(const std::string& path);

}  // namespace semilinear
