#pragma once

// Executable regularity certificates built on the projections: dyadic sweeps,
// growth fits, the bounded-projection criterion for C^{1,1}, free-boundary
// extraction, assumption checkers and the no-sign decomposition.

#include <Eigen/Dense>
#include <functional>
#include <json.hpp>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "semilinear/elliptic_solver.hpp"
#include "semilinear/field.hpp"
#include "semilinear/harmonic_space.hpp"
#include "semilinear/projections.hpp"

namespace semilinear {

struct SweepRecord {
  double radius = 0.0;
  P2Element pi;
  P2Element q;
  double sup_pi = 0.0;
  double l2_q_sphere = 0.0;
  double energy_deriv = 0.0;
  double growth_ratio = 1.0;  // sup_pi / previous sup_pi (1 for the first record)
};

struct ScaleSweep {
  Eigen::Vector2d base_point = Eigen::Vector2d::Zero();
  double r0 = 0.25;
  int requested_scales = 0;  // J
  bool truncated = false;    // finest scales dropped as under-resolved
  double spacing = 0.0;      // field resolution, 0 for exact fields
  std::vector<SweepRecord> records;

  std::vector<double> radii() const;
  std::vector<double> sup_pi() const;
  nlohmann::json to_json() const;
  /// Rows y1,y2,r,c0,c1,l2_sphere,sup_B1,energy_derivative (Q coefficients).
  std::string to_csv_rows() const;
};

std::string sweep_csv_header();

struct SweepOptions {
  bool with_q = true;
  bool with_energy = true;
};

/// Radii r0 * 2^-j, j = 0..J. Requires |y| <= 1/2 and r0 <= 1/4; scales below
/// 8h are dropped and flagged instead of raising.
ScaleSweep dyadic_sweep(const DifferentiableField& u, const Eigen::Vector2d& y, double r0, int scales,
                        const SweepOptions& options = {});

enum class GrowthVerdict { bounded, log_growth, super_log };
std::string to_string(GrowthVerdict v);

struct LogBoundFit {
  double c_fit = 0.0;           // slope of sup_pi in log(1/r)
  double slope_per_step = 0.0;  // slope per halving of r
  double intercept = 0.0;
  double curvature = 0.0;       // quadratic coefficient in log(1/r)
  double tol_slope = 0.0;
  GrowthVerdict verdict = GrowthVerdict::bounded;
};

/// Least-squares fit of sup_pi against log(1/r). tol_slope (per halving)
/// defaults to 0.02 * median(sup_pi). Needs at least 5 records.
LogBoundFit log_bound_fit(const ScaleSweep& sweep, std::optional<double> tol_slope = std::nullopt);

/// Slope of log(sup_pi) against log(log(1/r) - offset).
double growth_exponent_fit(const ScaleSweep& sweep, double log_offset = 0.0);

struct QuadraticGrowthRecord {
  double radius = 0.0;
  double sup_deviation = 0.0;  // sup over B_r(y) of |u - u(y) - (x-y).grad u(y)|
  double ratio_log = 0.0;      // / (r^2 log(1/r))
  double ratio_pure = 0.0;     // / r^2
};

std::vector<QuadraticGrowthRecord> quadratic_growth(const DifferentiableField& u, const Eigen::Vector2d& y,
                                                    const std::vector<double>& radii);

/// The 17 x 17 lattice of [-1/2, 1/2]^2 restricted to the closed disk of radius 1/2.
std::vector<Eigen::Vector2d> sample_lattice(int per_axis = 17, double half_width = 0.5);

struct C11Certificate {
  bool bounded = true;
  double m_emp = 0.0;             // max Frobenius norm of D^2 Pi over points and scales
  double sup_hessian = 0.0;       // sup |D^2 u| over sampled interior points
  double median_sup_pi = 0.0;
  double tol_slope = 0.0;         // 0.02 * median, per halving
  double max_trend_slope = 0.0;
  Eigen::Vector2d worst_point = Eigen::Vector2d::Zero();
  double smallest_certified_scale = 0.0;
  int points = 0;
  /// Verdicts at 0.5x, 1x, 2x the tolerance.
  std::vector<std::pair<double, bool>> sensitivity;

  nlohmann::json to_json() const;
};

/// Per-point trend: the smaller of the least-squares slope of sup_pi per
/// halving and the increment over the finest halving. Trends above tol_slope
/// refuse the certificate. Every sweep needs at least 4 records.
C11Certificate c11_certificate(const std::vector<ScaleSweep>& sweeps, const DifferentiableField* u = nullptr);

struct FreeBoundaryPoint {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  double grad_norm = 0.0;
  bool gamma0 = false;
};

struct FreeBoundarySet {
  std::vector<FreeBoundaryPoint> points;
  double theta = 1.0;
  double radius = 0.0;
  double max_abs_u = 0.0;  // |u| at the located points

  std::size_t count_gamma0() const;
  std::size_t count_gamma1() const;
  nlohmann::json to_json() const;
};

/// Fraction of each zero-phase node's cell that belongs to the coincidence
/// set: clamp(1 - mu / g(x, 0), 0, 1), with mu the discrete Laplacian. Zero
/// on nodes of either sign.
ScalarField coincidence_fraction(const Solution& sol, const RhsSpec& rhs);

/// Sign changes are located by linear interpolation along grid edges. Edges
/// joining a zero-phase node to a signed node put the point inside the zero
/// node's cell at its coincidence fraction (centre when no fraction is given).
FreeBoundarySet extract_free_boundary(const ScalarField& u, double theta, double r,
                                      const ScalarField* fraction = nullptr);

struct MonotonicityRecord {
  Eigen::Vector2d base_point = Eigen::Vector2d::Zero();
  double radius = 0.0;
  double t_norm = 0.0;          // T_y(r) = |Q_y(u,r)| on the circle
  double energy_deriv = 0.0;    // d/dr of T_y(r)^2
  double grad_norm = 0.0;       // |grad u(y)|
  bool admissible = true;       // |grad u(y)| < theta r
};

std::vector<MonotonicityRecord> monotonicity_probe(const DifferentiableField& u, const Eigen::Vector2d& y,
                                                   const std::vector<double>& radii, double theta = 1.0);
/// Newton roots of grad u seeded from the lattice of B_region, deduplicated.
std::vector<Eigen::Vector2d> critical_points(const DifferentiableField& u, double region = 0.5);
/// Probes at every free-boundary point with |y| <= region and at every
/// critical point of u in B_region. A probe additionally needs dist(y, Gamma) < r
/// to be admissible.
std::vector<MonotonicityRecord> free_boundary_probes(const DifferentiableField& u, const FreeBoundarySet& gamma,
                                                     const std::vector<double>& radii, double theta = 1.0,
                                                     double region = 0.5);
/// Largest T with a non-positive derivative (0 when every derivative is positive).
double empirical_threshold(const std::vector<MonotonicityRecord>& records);
/// integral over {q > 0} of q.
double positive_part_integral(const P2Element& q);

struct DiniResult {
  bool divergent = false;
  double integral = 0.0;   // +inf when divergent
  double ratio = 0.0;      // last ratio of successive doubling increments
  std::vector<double> increments;
};

/// integral_0^eps omega(t)/t dt in s = -log t: doubling increments down to
/// t_min, geometric tail extrapolation; ratio >= 0.97 means divergence.
/// Throws InvalidModulusError if omega decreases on the sample grid.
DiniResult dini_integral(const std::function<double(double)>& omega, double epsilon, double t_min = 1e-12);

struct AssumptionAResult {
  DiniResult dini;
  double potential_sup = 0.0;  // sup_t sup_{|x| <= region} |D^2 v_t|
  std::vector<double> t_grid;
};

AssumptionAResult check_assumption_A(const RhsSpec& rhs, const std::vector<double>& t_grid, double epsilon,
                                     int grid_size = 129, double region = 0.5);

/// min over grid nodes of f(x, 0+) - f(x, 0-) for the composite right-hand
/// side; g1(x, 0) - g2(x, 0) for two-phase data.
double check_assumption_B(const RhsSpec& rhs, int grid_size = 65);

struct DensityRecord {
  double radius = 0.0;
  double lambda = 0.0;    // |Lambda_r|
  double ratio = 0.0;     // lambda(r/2) / lambda(r); 0 when lambda(r) = 0
  double q_norm = 0.0;    // |Q_y(u,r)| on the circle
};

std::vector<DensityRecord> coincidence_density(const Solution& sol, const RhsSpec& rhs, const Eigen::Vector2d& y,
                                               const std::vector<double>& radii);

struct Decomposition {
  Eigen::Vector2d base_point = Eigen::Vector2d::Zero();  // snapped to a node
  double radius = 0.0;                                   // multiple of h
  ScalarField rescaled;  // u(rx+y)/r^2
  P2Element q;
  ScalarField h;
  ScalarField w;
  ScalarField z;
  double reconstruction_error = 0.0;  // sup over |x| <= 1/2
  double z_sup = 0.0;
  double hessian_z_l2 = 0.0;          // |D^2 z|_{L2(B_1/2)}
};

/// Solves the three Dirichlet problems on the rescaled grid aligned with the
/// solution grid (y snapped to a node, r = k h, 2k+1 points per axis).
Decomposition decompose_no_sign(const Solution& sol, const RhsSpec& rhs, const Eigen::Vector2d& y, double r);

/// max_j sup_pi(j) - sup_pi(0).
double telescoping_excess(const ScaleSweep& sweep);

struct DiagnosticsReport {
  std::string problem;
  std::vector<ScaleSweep> sweeps;
  std::optional<double> growth_exponent;
  std::optional<LogBoundFit> origin_fit;
  C11Certificate certificate;
  std::optional<FreeBoundarySet> free_boundary;
  std::optional<AssumptionAResult> assumption_a;
  std::optional<double> assumption_b;
  std::vector<QuadraticGrowthRecord> growth;
  std::string verdict;

  nlohmann::json to_json() const;
};

}  // namespace semilinear
