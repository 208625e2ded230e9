#pragma once

#include <vector>

namespace semilinear {

struct QuadratureNode {
  double x1;
  double x2;
  double weight;
};

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Trapezoid rule on the unit circle; weights sum to 2 pi.
std::vector<QuadratureNode> circle_rule(int nodes = 512);

/// Unit disk rule: Gauss-Legendre in s = rho^2 (area element rho d rho = ds / 2)
/// times a uniform angular rule. Weights sum to pi.
std::vector<QuadratureNode> disk_rule(int radial = 64, int angular = 128);

/// Cached default rules (512 circle nodes, 64 x 128 disk nodes).
const std::vector<QuadratureNode>& default_circle_rule();
const std::vector<QuadratureNode>& default_disk_rule();

}  // namespace semilinear
