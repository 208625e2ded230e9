#pragma once

// Run configuration: a versioned `key = value` text format, flags applied on
// top, and a canonical serialization whose SHA-256 identifies the run.
//
//   schema = 1
//   problem = two_phase_membrane      # catalog name, or "inline"
//   param.K = 4                       # catalog parameters
//   inline.kind = two_phase           # inline problems only
//   inline.g1 = 1
//   inline.g2 = -1
//   inline.boundary = x1*abs(x1)/2
//   grid = 257                        # 0: catalog default
//   solver.tol_linear = 1e-10
//   diag.r0 = 0.25                    # 0: catalog default
//   diag.scales = 4                   # 0: catalog default
//   diag.theta = 1
//   diag.lattice = 17
//   sweep.param = p
//   sweep.values = 0.3, 0.5, 0.7
//   out = out
//   seed = 0
//   format = json

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semilinear/elliptic_solver.hpp"
#include "semilinear/problem_catalog.hpp"

namespace semilinear {

struct RunConfig {
  static constexpr int kSchema = 1;

  std::string problem;
  Parameters params;
  std::map<std::string, std::string> inline_spec;  // kind, f, g1, g2, g, boundary
  int grid = 0;

  double tol_linear = 1e-10;
  double tol_picard = 1e-8;
  int max_picard = 500;
  double damping = 0.7;
  int max_refinement = 20;

  double r0 = 0.0;
  int scales = 0;
  double theta = 1.0;
  int lattice = 17;

  std::string sweep_param;
  std::vector<double> sweep_values;

  std::string out = "out";
  std::uint64_t seed = 0;
  std::string format = "json";

  /// Throws ConfigError for unknown keys, malformed values or a schema other
  /// than kSchema. Lines are `key = value`; '#' starts a comment.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  /// Single key override, same vocabulary as the file.
  void set(const std::string& key, const std::string& value);

  /// Sorted `key = value` lines, doubles with 17 significant digits. The
  /// output directory is not part of the identity of a run and is omitted.
  std::string serialize() const;
  /// Hex SHA-256 of serialize().
  std::string hash() const;
  nlohmann::json to_json() const;

  /// Throws ConfigError / UnknownNameError; N must be odd and >= 65.
  void validate(bool need_problem = true) const;

  CatalogEntry entry() const;
  SolverConfig solver() const;
  /// Explicit grid, else the catalog default.
  int grid_size(const CatalogEntry& e) const;
  double radius0(const CatalogEntry& e) const;
  int scale_count(const CatalogEntry& e) const;
};

std::string sha256_hex(const std::string& data);

/// Exclusive `.lock` file inside the output directory (created if missing),
/// removed on destruction. Throws ConfigError when another run holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;
  ~OutputLock();

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

}  // namespace semilinear
