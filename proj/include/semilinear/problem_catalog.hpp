#pragma once

// Named problem instances: right-hand side, boundary data, optional closed
// form, and the diagnostic signature each instance is expected to show.
// Boundary data are conventions of this catalog, chosen so that the
// interesting point sits at the origin.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semilinear/elliptic_solver.hpp"
#include "semilinear/field.hpp"

namespace semilinear {

struct ExpectedSignature {
  std::string c11 = "unknown";  // yes | no | unknown
  std::optional<double> growth_exponent;
  std::string assumption_flags;
};

using Parameters = std::map<std::string, double>;

struct CatalogEntry {
  std::string name;
  Parameters parameters;
  RhsSpec rhs;
  BoundaryFunction boundary;
  std::string boundary_descriptor;
  FieldPtr reference;  // closed form, null when none is known
  ExpectedSignature expected;
  std::string provenance;
  std::vector<std::string> clamps;

  /// False when the entry is a field rather than a boundary-value problem
  /// (the source blows up at the circle); diagnostics then sample `reference`.
  bool solvable = true;
  /// Solver branch selection for no-sign entries (see SolverConfig).
  bool nonnegative_branch = false;

  // Residual verification region: nodes with |x| in [inner_radius, 1 - outer_margin],
  // free-boundary neighbourhoods optionally skipped, plus guard bands of width
  // guard_width * h around lines declared by `guard`.
  double inner_radius = 0.0;
  double outer_margin = 0.05;
  bool exclude_free_boundary = false;
  std::function<bool(double x1, double x2, double h)> guard;

  /// Diagnostic defaults for this entry.
  int diagnose_grid = 513;
  double r0 = 0.25;
  int scales = 4;

  nlohmann::json to_json() const;
};

/// Throws UnknownNameError. Unrecognized parameter keys throw ConfigError.
CatalogEntry get(const std::string& name, const Parameters& params = {});
std::vector<std::string> list();

/// Inline problem from expressions (see Expression): kind selects which of
/// f, g1, g2, g is required.
CatalogEntry custom_problem(const std::string& kind, const std::map<std::string, std::string>& expressions,
                            const std::string& boundary);

struct ReferenceResidual {
  int grid_size = 0;
  double residual = 0.0;
};

struct ReferenceReport {
  bool available = false;
  std::vector<ReferenceResidual> residuals;
  double ratio = 0.0;  // coarse / fine residual
  bool passed = false;

  nlohmann::json to_json() const;
};

/// fd_laplacian(reference) against rhs(x, reference) on each grid. Passes when
/// the finest residual is <= 1e-6 or the coarse/fine ratio is >= 3.5.
ReferenceReport verify_reference(const CatalogEntry& entry, const std::vector<int>& grids = {129, 257});

/// Pointwise view of a solve. The Laplacian is rhs(x, u(x)) away from the
/// free boundary and the node's discrete Laplacian next to it, so that
/// partially coincident cells carry their fractional source.
FieldPtr solution_field(const Solution& sol, const RhsSpec& rhs);

/// The field a diagnosis runs on: the closed form sampled on an N grid for
/// non-solvable entries, otherwise a fresh solve.
struct PreparedField {
  ScalarField grid;
  FieldPtr field;
  std::optional<Solution> solution;
};
PreparedField prepare_field(const CatalogEntry& entry, int grid_size, const SolverConfig& config = {});

}  // namespace semilinear
