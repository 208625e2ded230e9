#include "semilinear/harmonic_space.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>

#include "semilinear/errors.hpp"

namespace semilinear {

namespace {

Eigen::MatrixXd offdiag_form(int n, int i, int j) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  a(i, j) = 0.5;
  a(j, i) = 0.5;
  return a;
}

Eigen::MatrixXd diagdiff_form(int n, int k) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  a(k, k) = 1.0;
  a(k + 1, k + 1) = -1.0;
  return a;
}

// integral over S^{n-1} of (x^T A x)(x^T B x), expanded into degree-4 moments.
double sphere_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> exps(n, 0);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (a(i, j) == 0.0) continue;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (b(k, l) == 0.0) continue;
          std::fill(exps.begin(), exps.end(), 0);
          ++exps[i];
          ++exps[j];
          ++exps[k];
          ++exps[l];
          total += a(i, j) * b(k, l) * sphere_monomial_moment(exps);
        }
    }
  return total;
}

}  // namespace

double sphere_monomial_moment(std::span<const int> exponents) {
  // 2 prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2)
  double log_num = 0.0;
  double half_sum = 0.0;
  for (int a : exponents) {
    if (a % 2 != 0) return 0.0;
    const double beta = 0.5 * (a + 1);
    log_num += std::lgamma(beta);
    half_sum += beta;
  }
  return 2.0 * std::exp(log_num - std::lgamma(half_sum));
}

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double unit_ball_volume(int n) { return unit_sphere_area(n) / n; }

HarmonicBasis::HarmonicBasis(int n) : n_(n) {
  if (n < 2) throw InvalidDimensionError("harmonic basis needs n >= 2, got " + std::to_string(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) elements_.push_back(offdiag_form(n, i, j));
  for (int k = 0; k + 1 < n; ++k) elements_.push_back(diagdiff_form(n, k));

  const auto m = static_cast<Eigen::Index>(elements_.size());
  gram_sphere_.resize(m, m);
  gram_ball_.resize(m, m);
  const double volume = unit_ball_volume(n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double s = sphere_product(elements_[i], elements_[j]);
      // D^2 q = 2A, constant over the ball.
      const double b = 4.0 * (elements_[i].cwiseProduct(elements_[j])).sum() * volume;
      gram_sphere_(i, j) = gram_sphere_(j, i) = s;
      gram_ball_(i, j) = gram_ball_(j, i) = b;
    }
  sphere_ldlt_.compute(gram_sphere_);
  ball_ldlt_.compute(gram_ball_);
}

Eigen::MatrixXd HarmonicBasis::assemble(const Eigen::VectorXd& coeffs) const {
  if (static_cast<std::size_t>(coeffs.size()) != size())
    throw InvalidDimensionError("coefficient vector length does not match basis");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (std::size_t k = 0; k < size(); ++k) a += coeffs[static_cast<Eigen::Index>(k)] * elements_[k];
  return a;
}

Eigen::VectorXd HarmonicBasis::coefficients_of(const Eigen::MatrixXd& a) const {
  if (a.rows() != n_ || a.cols() != n_) throw InvalidDimensionError("matrix size does not match basis");
  Eigen::VectorXd c(static_cast<Eigen::Index>(size()));
  Eigen::Index k = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) c[k++] = a(i, j) + a(j, i);
  const double mean_diag = a.trace() / n_;
  double partial = 0.0;
  for (int m = 0; m + 1 < n_; ++m) {
    partial += a(m, m) - mean_diag;
    c[k++] = partial;
  }
  return c;
}

Eigen::VectorXd HarmonicBasis::solve_sphere(const Eigen::VectorXd& rhs) const { return sphere_ldlt_.solve(rhs); }
Eigen::VectorXd HarmonicBasis::solve_ball(const Eigen::VectorXd& rhs) const { return ball_ldlt_.solve(rhs); }

BasisPtr build_basis(int n) { return std::make_shared<const HarmonicBasis>(n); }

BasisPtr basis_for(int n) {
  static std::mutex mutex;
  static std::map<int, BasisPtr> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto basis = build_basis(n);
  cache.emplace(n, basis);
  return basis;
}

Eigen::MatrixXd gram_sphere(const HarmonicBasis& basis) { return basis.gram_sphere(); }
Eigen::MatrixXd gram_ball(const HarmonicBasis& basis) { return basis.gram_ball(); }

NormEquivalence norm_equivalence_constants(const HarmonicBasis& basis) {
  return norm_equivalence_constants(basis.gram_sphere(), basis.gram_ball());
}

NormEquivalence norm_equivalence_constants(const Eigen::MatrixXd& gram_sphere_m, const Eigen::MatrixXd& gram_ball_m) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram_sphere_m, gram_ball_m);
  const auto& values = solver.eigenvalues();  // ascending
  NormEquivalence out;
  out.c_low = std::sqrt(values[0]);
  out.c_high = std::sqrt(values[values.size() - 1]);
  out.argmin = solver.eigenvectors().col(0);
  out.argmax = solver.eigenvectors().col(values.size() - 1);
  return out;
}

P2Element::P2Element(BasisPtr basis, Eigen::VectorXd coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (!basis_) throw InvalidDimensionError("P2Element needs a basis");
  if (static_cast<std::size_t>(coeffs_.size()) != basis_->size())
    throw InvalidDimensionError("coefficient vector length does not match basis");
}

P2Element P2Element::zero(BasisPtr basis) {
  const auto m = static_cast<Eigen::Index>(basis->size());
  return P2Element(std::move(basis), Eigen::VectorXd::Zero(m));
}

P2Element P2Element::from_matrix(BasisPtr basis, const Eigen::MatrixXd& a) {
  Eigen::VectorXd c = basis->coefficients_of(a);
  return P2Element(std::move(basis), std::move(c));
}

Eigen::MatrixXd P2Element::quadratic_form() const { return basis_->assemble(coeffs_); }

double P2Element::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != basis_->dim_ambient()) throw InvalidDimensionError("point dimension does not match basis");
  return x.dot(quadratic_form() * x);
}

double P2Element::operator()(double x1, double x2) const {
  if (basis_->dim_ambient() != 2) throw InvalidDimensionError("planar evaluation on a non-planar basis");
  // basis order for n = 2: {x1 x2, x1^2 - x2^2}
  return coeffs_[0] * x1 * x2 + coeffs_[1] * (x1 * x1 - x2 * x2);
}

double P2Element::l2_sphere() const { return std::sqrt(std::max(0.0, coeffs_.dot(basis_->gram_sphere() * coeffs_))); }
double P2Element::l2_ball() const { return std::sqrt(std::max(0.0, coeffs_.dot(basis_->gram_ball() * coeffs_))); }

double P2Element::sup_ball() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(quadratic_form(), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

P2Element P2Element::operator+(const P2Element& other) const { return P2Element(basis_, coeffs_ + other.coeffs_); }
P2Element P2Element::operator-(const P2Element& other) const { return P2Element(basis_, coeffs_ - other.coeffs_); }
P2Element P2Element::operator*(double s) const { return P2Element(basis_, coeffs_ * s); }

std::vector<double> eval_p2(const P2Element& q, const std::vector<Eigen::VectorXd>& points) {
  const Eigen::MatrixXd a = q.quadratic_form();
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    if (x.size() != q.dim_ambient()) throw InvalidDimensionError("point dimension does not match basis");
    out.push_back(x.dot(a * x));
  }
  return out;
}

nlohmann::json to_json(const HarmonicBasis& basis) {
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& a : basis.elements()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
      rows.push_back(row);
    }
    elements.push_back(rows);
  }
  return {{"n", basis.dim_ambient()}, {"order_tag", HarmonicBasis::order_tag()}, {"elements", elements}};
}

std::string serialize_p2(const P2Element& q) {
  std::string out = "{\"n\":" + std::to_string(q.dim_ambient()) + ",\"order_tag\":\"" + HarmonicBasis::order_tag() +
                    "\",\"coeffs\":[";
  std::array<char, 40> buf{};
  for (Eigen::Index k = 0; k < q.coeffs().size(); ++k) {
    std::snprintf(buf.data(), buf.size(), "%.17g", q.coeffs()[k]);
    if (k) out += ',';
    out += buf.data();
  }
  out += "]}";
  return out;
}

P2Element deserialize_p2(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("order_tag").get<std::string>() != HarmonicBasis::order_tag())
    throw InvalidDimensionError("unknown basis order tag");
  auto basis = basis_for(j.at("n").get<int>());
  const auto values = j.at("coeffs").get<std::vector<double>>();
  return P2Element(basis, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

nlohmann::json to_json(const P2Element& q) { return nlohmann::json::parse(serialize_p2(q)); }

}  // namespace semilinear
