#pragma once

// Bivariate polynomials with exact derivatives, used as oracles.

#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <utility>

#include "semilinear/field.hpp"

namespace testing_support {

class Poly {
 public:
  Poly() = default;
  Poly& add(int i, int j, double c) {
    terms_[{i, j}] += c;
    return *this;
  }
  double operator()(double x, double y) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * std::pow(x, e.first) * std::pow(y, e.second);
    return s;
  }
  Poly dx() const {
    Poly p;
    for (const auto& [e, c] : terms_)
      if (e.first > 0) p.add(e.first - 1, e.second, c * e.first);
    return p;
  }
  Poly dy() const {
    Poly p;
    for (const auto& [e, c] : terms_)
      if (e.second > 0) p.add(e.first, e.second - 1, c * e.second);
    return p;
  }
  Poly operator+(const Poly& o) const {
    Poly p = *this;
    for (const auto& [e, c] : o.terms_) p.add(e.first, e.second, c);
    return p;
  }
  Poly operator*(double s) const {
    Poly p;
    for (const auto& [e, c] : terms_) p.add(e.first, e.second, c * s);
    return p;
  }
  /// x.grad p - 2p
  Poly euler_minus_two() const {
    Poly p;
    for (const auto& [e, c] : terms_) p.add(e.first, e.second, c * (e.first + e.second - 2));
    return p;
  }

  semilinear::FieldPtr field() const {
    const Poly px = dx(), py = dy(), pxx = px.dx(), pxy = px.dy(), pyy = py.dy();
    return std::make_shared<semilinear::AnalyticField>(
        [p = *this](double x, double y) { return p(x, y); },
        [px, py](double x, double y) { return Eigen::Vector2d(px(x, y), py(x, y)); },
        [pxx, pxy, pyy](double x, double y) {
          Eigen::Matrix2d h;
          h << pxx(x, y), pxy(x, y), pxy(x, y), pyy(x, y);
          return h;
        });
  }

 private:
  std::map<std::pair<int, int>, double> terms_;
};

/// Re and Im of (x + i y)^k.
inline std::pair<Poly, Poly> harmonic_pair(int k) {
  Poly re, im;
  double binom = 1.0;
  for (int m = 0; m <= k; ++m) {
    // i^m
    const int r = m % 4;
    const double c = binom;
    if (r == 0) re.add(k - m, m, c);
    if (r == 1) im.add(k - m, m, c);
    if (r == 2) re.add(k - m, m, -c);
    if (r == 3) im.add(k - m, m, -c);
    binom = binom * (k - m) / (m + 1);
  }
  return {re, im};
}

}  // namespace testing_support
