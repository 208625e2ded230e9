#include "semilinear/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace semilinear {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = n == 0 ? 1.0 : p1;
  dp = n * (x * p - p0) / (x * x - 1.0);
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0;
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

std::vector<QuadratureNode> circle_rule(int nodes) {
  std::vector<QuadratureNode> rule;
  rule.reserve(nodes);
  const double w = 2.0 * std::numbers::pi / nodes;
  for (int k = 0; k < nodes; ++k) {
    const double theta = w * k;
    rule.push_back({std::cos(theta), std::sin(theta), w});
  }
  return rule;
}

std::vector<QuadratureNode> disk_rule(int radial, int angular) {
  std::vector<double> s;
  std::vector<double> ws;
  gauss_legendre(radial, s, ws);
  std::vector<QuadratureNode> rule;
  rule.reserve(static_cast<std::size_t>(radial) * angular);
  const double wt = 2.0 * std::numbers::pi / angular;
  for (int i = 0; i < radial; ++i) {
    const double rho = std::sqrt(0.5 * (s[i] + 1.0));
    const double wr = 0.25 * ws[i];  // [-1,1] -> [0,1] and the 1/2 from ds = 2 rho d rho
    for (int k = 0; k < angular; ++k) {
      // half-step offset keeps nodes off the coordinate axes
      const double theta = wt * (k + 0.5);
      rule.push_back({rho * std::cos(theta), rho * std::sin(theta), wr * wt});
    }
  }
  return rule;
}

const std::vector<QuadratureNode>& default_circle_rule() {
  static const std::vector<QuadratureNode> rule = circle_rule(512);
  return rule;
}

const std::vector<QuadratureNode>& default_disk_rule() {
  static const std::vector<QuadratureNode> rule = disk_rule(64, 128);
  return rule;
}

}  // namespace semilinear
