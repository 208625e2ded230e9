#pragma once

// Second-order homogeneous harmonic polynomials q(x) = x^T A x, A symmetric and
// trace-free. Every basis element is stored as its coefficient matrix A.

#include <Eigen/Dense>
#include <memory>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

namespace semilinear {

/// Ordered basis of the harmonic quadratics in dimension n.
///
/// Ordering is fixed: the off-diagonal forms x_i x_j (i < j, lexicographic)
/// come first, then the diagonal differences x_i^2 - x_{i+1}^2. The basis is
/// not orthogonal; both Gram matrices are computed once from closed-form
/// monomial moments and cached.
class HarmonicBasis {
 public:
  explicit HarmonicBasis(int n);

  int dim_ambient() const { return n_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<Eigen::MatrixXd>& elements() const { return elements_; }
  const Eigen::MatrixXd& element(std::size_t k) const { return elements_.at(k); }

  /// (i,j) = integral over the unit sphere of q_i q_j.
  const Eigen::MatrixXd& gram_sphere() const { return gram_sphere_; }
  /// (i,j) = integral over the unit ball of D^2 q_i : D^2 q_j.
  const Eigen::MatrixXd& gram_ball() const { return gram_ball_; }

  static constexpr const char* order_tag() { return "offdiag_lex_then_diagdiff"; }

  /// A = sum_k c_k A_k.
  Eigen::MatrixXd assemble(const Eigen::VectorXd& coeffs) const;
  /// Inverse of assemble for a symmetric trace-free A (the trace part of a
  /// general symmetric A is ignored).
  Eigen::VectorXd coefficients_of(const Eigen::MatrixXd& a) const;

  /// Solves gram_sphere * c = rhs with a cached factorization.
  Eigen::VectorXd solve_sphere(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_ball(const Eigen::VectorXd& rhs) const;

 private:
  int n_;
  std::vector<Eigen::MatrixXd> elements_;
  Eigen::MatrixXd gram_sphere_;
  Eigen::MatrixXd gram_ball_;
  Eigen::LDLT<Eigen::MatrixXd> sphere_ldlt_;
  Eigen::LDLT<Eigen::MatrixXd> ball_ldlt_;
};

using BasisPtr = std::shared_ptr<const HarmonicBasis>;

/// Throws InvalidDimensionError for n < 2.
BasisPtr build_basis(int n);
/// Shared, lazily built basis per dimension.
BasisPtr basis_for(int n);

Eigen::MatrixXd gram_sphere(const HarmonicBasis& basis);
Eigen::MatrixXd gram_ball(const HarmonicBasis& basis);

double unit_sphere_area(int n);
double unit_ball_volume(int n);
/// Integral of x^alpha over the unit sphere S^{n-1}; zero when any exponent is odd.
double sphere_monomial_moment(std::span<const int> exponents);

struct NormEquivalence {
  double c_low = 0.0;
  double c_high = 0.0;
  Eigen::VectorXd argmin;  // coefficients achieving c_low
  Eigen::VectorXd argmax;  // coefficients achieving c_high
};

/// c_low * |q|_ball <= |q|_sphere <= c_high * |q|_ball, where |q|_ball is the
/// Hessian norm sqrt(c^T G_ball c) and |q|_sphere = sqrt(c^T G_sphere c).
NormEquivalence norm_equivalence_constants(const HarmonicBasis& basis);
NormEquivalence norm_equivalence_constants(const Eigen::MatrixXd& gram_sphere_m,
                                           const Eigen::MatrixXd& gram_ball_m);

/// A member of the harmonic quadratics expressed in a fixed basis.
class P2Element {
 public:
  P2Element() = default;
  P2Element(BasisPtr basis, Eigen::VectorXd coeffs);
  static P2Element zero(BasisPtr basis);
  static P2Element from_matrix(BasisPtr basis, const Eigen::MatrixXd& a);

  const BasisPtr& basis() const { return basis_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  int dim_ambient() const { return basis_->dim_ambient(); }

  Eigen::MatrixXd quadratic_form() const;
  Eigen::MatrixXd hessian() const { return 2.0 * quadratic_form(); }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double operator()(double x1, double x2) const;

  double l2_sphere() const;
  double l2_ball() const;
  /// sup over the closed unit ball of |q| = spectral radius of A.
  double sup_ball() const;

  P2Element operator+(const P2Element& other) const;
  P2Element operator-(const P2Element& other) const;
  P2Element operator*(double s) const;

 private:
  BasisPtr basis_;
  Eigen::VectorXd coeffs_;
};

/// Exact evaluation q(x) = x^T A x at every point. Throws InvalidDimensionError on mismatch.
std::vector<double> eval_p2(const P2Element& q, const std::vector<Eigen::VectorXd>& points);

nlohmann::json to_json(const HarmonicBasis& basis);
/// {n, order_tag, coeffs[...]}; coefficients carry 17 significant digits.
std::string serialize_p2(const P2Element& q);
P2Element deserialize_p2(const std::string& text);
nlohmann::json to_json(const P2Element& q);

}  // namespace semilinear
