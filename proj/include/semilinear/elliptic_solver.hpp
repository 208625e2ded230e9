#pragma once

// Dirichlet Poisson solves on the unit disk and the outer iterations for the
// semilinear, two-phase and no-sign problems.
//
// Discretisation: five-point Laplacian on the Cartesian grid, with
// Shortley-Weller arms wherever a neighbour lies outside the open disk. The
// arm length theta*h ends at the circle crossing, where the boundary callable
// supplies the value. The scheme is exact on quadratics.

#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "semilinear/field_grid.hpp"

namespace semilinear {

struct SolverConfig {
  double tol_linear = 1e-10;
  double tol_picard = 1e-8;
  int max_picard = 500;
  double damping = 0.7;
  std::optional<ScalarField> initial_guess;
  /// Cap on iterative-refinement sweeps inside every linear solve.
  int max_refinement = 20;
  /// No-sign problems only: zero nodes never enter the negative phase. With
  /// g > 0 this selects the solution with a coincidence set instead of the
  /// Poisson solution, which is also a solution.
  bool nonnegative_branch = false;

  /// Throws ConfigError on non-positive tolerances or damping outside (0,1].
  void validate() const;
};

using RhsFunction = std::function<double(double x1, double x2, double t)>;
using BoundaryFunction = std::function<double(double x1, double x2)>;

enum class RhsKind { continuous, two_phase, no_sign };
std::string to_string(RhsKind kind);

/// Declared structural assumptions of a right-hand side. Nothing here is
/// enforced by the solver; the diagnostics module checks them.
struct AssumptionFlags {
  std::string omega_descriptor = "none";        // modulus of continuity in t
  std::function<double(double)> omega;          // omega(s), nondecreasing
  double h_bound = 0.0;                         // sup_x h(x) in |f(x,t2)-f(x,t1)| <= h(x) omega
  double sigma0 = 0.0;                          // declared jump margin for two-phase data
  double theta0 = 1.0;                          // Gamma^0 / Gamma^1 threshold
  double t_bound = 1.0;                         // evaluators bounded on B1 x [-M, M]
  std::string notes;                            // clamps and other conventions
};

struct RhsSpec {
  RhsKind kind = RhsKind::continuous;
  RhsFunction f;   // continuous
  RhsFunction g1;  // two-phase, active where u > 0
  RhsFunction g2;  // two-phase, active where u < 0
  RhsFunction g;   // no-sign, active where u != 0
  AssumptionFlags flags;

  static RhsSpec continuous(RhsFunction f);
  static RhsSpec two_phase(RhsFunction g1, RhsFunction g2);
  static RhsSpec no_sign(RhsFunction g);

  /// The composite right-hand side f(x, t) including phase indicators.
  double operator()(double x1, double x2, double t) const;
};

/// Phase labels stored per grid node.
enum Phase : std::int8_t { kZero = 0, kPositive = 1, kNegative = -1, kFixed = 2 };

struct SolveReport {
  std::string kind;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;  // successive sup-differences
  std::vector<int> sign_flips;         // phase changes per iteration
  double linear_residual = 0.0;        // last relative linear residual
  std::string initial_guess = "zero";
  double zero_band = 0.0;              // dead-band used by the no-sign rule
  int secant_from = 0;                 // first secant iteration (0: Picard throughout)

  nlohmann::json to_json() const;
};

struct Solution {
  ScalarField u;
  /// Discrete Laplacian of u at unknown nodes (0 elsewhere).
  ScalarField laplacian;
  /// Phase per node (kFixed for Dirichlet and exterior nodes).
  std::vector<std::int8_t> phase;
  SolveReport report;
};

/// The discrete operator on one grid: node classification, cut-cell arms and
/// the sparse matrix over unknown nodes.
class DiskLaplacian {
 public:
  explicit DiskLaplacian(int grid_size);

  int grid_size() const { return n_; }
  double spacing() const { return h_; }
  int unknowns() const { return static_cast<int>(nodes_.size()); }
  /// -1 for Dirichlet or exterior nodes.
  int index(int i, int j) const { return index_[static_cast<std::size_t>(j) * n_ + i]; }
  std::pair<int, int> node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }
  double diagonal(int k) const { return diag_[static_cast<std::size_t>(k)]; }

  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
  /// Sum over cut arms of c_arm * g(crossing) per unknown.
  Eigen::VectorXd boundary_contribution(const BoundaryFunction& g) const;
  /// L applied to the interior vector with boundary values g.
  Eigen::VectorXd apply(const Eigen::VectorXd& x, const BoundaryFunction& g) const;
  /// Interior vector -> full field: Dirichlet nodes take g, exterior nodes are
  /// filled by radial quadratic extrapolation (exact for quadratics).
  ScalarField to_field(const Eigen::VectorXd& x, const BoundaryFunction& g) const;
  Eigen::VectorXd restrict(const ScalarField& field) const;

 private:
  struct Arm {
    int row;
    double coeff;
    double bx;  // crossing point on the circle
    double by;
  };

  int n_;
  double h_;
  std::vector<int> index_;
  std::vector<std::pair<int, int>> nodes_;
  std::vector<double> diag_;
  std::vector<Arm> arms_;
  Eigen::SparseMatrix<double> matrix_;
};

/// Solves A x = b with sparse LU plus iterative refinement until
/// |b - A x|_inf <= tol * |b|_inf; throws SolverStallError past the cap.
class LinearSolver {
 public:
  LinearSolver(const Eigen::SparseMatrix<double>& a, double tol, int max_refinement);
  LinearSolver(const LinearSolver&) = delete;
  LinearSolver& operator=(const LinearSolver&) = delete;
  ~LinearSolver();
  Eigen::VectorXd solve(const Eigen::VectorXd& b);
  /// Numeric refactorization for a matrix with the same sparsity pattern;
  /// the column ordering is kept.
  void refactor(const Eigen::SparseMatrix<double>& a);
  double last_residual() const { return last_residual_; }

 private:
  struct Impl;
  Impl* impl_;
  double tol_;
  int max_refinement_;
  double last_residual_ = 0.0;
};

ScalarField solve_dirichlet(const ScalarField& rhs_field, const BoundaryFunction& boundary,
                            const SolverConfig& config = {});
Solution solve_semilinear(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size,
                          const SolverConfig& config = {});
Solution solve_two_phase(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size,
                         const SolverConfig& config = {});
Solution solve_no_sign(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size,
                       const SolverConfig& config = {});
/// Dispatches on rhs.kind.
Solution solve(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size, const SolverConfig& config = {});

/// Convolution with K(z) = log|z| / (2 pi) over the disk, exact cell
/// integrals of K, density weighted by the cell area inside the disk.
ScalarField newtonian_potential(const ScalarField& density);
/// Antiderivative F with d^2 F / dx dy = log(x^2 + y^2).
double log_kernel_antiderivative(double x, double y);

/// sup of |fd_laplacian(u) - rhs(x, u)| over nodes at least `margin` inside
/// the circle. With exclude_free_boundary, nodes whose 5x5 neighbourhood
/// mixes the classes {u > 0, u < 0, u = 0} are skipped; `skip` removes further
/// nodes (guard bands).
double pde_residual(const ScalarField& u, const RhsFunction& rhs, double margin, bool exclude_free_boundary = false,
                    const std::function<bool(double, double)>& skip = nullptr);

}  // namespace semilinear
