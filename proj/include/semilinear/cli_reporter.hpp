#pragma once

// The four commands behind the command-line tool. Each validates its config,
// locks the output directory, writes its artifacts plus manifest.json and
// returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "semilinear/run_config.hpp"

namespace semilinear {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNonConvergence = 3, kExitInvariant = 4 };

/// Solution field (solution.bin plus solution.csv or .json), solve.json.
int cmd_solve(const RunConfig& config);
/// Diagnoses a fresh solve, the sampled closed form of a non-solvable entry,
/// or a stored solution field (.bin or .csv). With a stored field the problem
/// may be empty; right-hand-side dependent checks are then skipped.
int cmd_diagnose(const RunConfig& config, const std::optional<std::filesystem::path>& stored = std::nullopt);
/// One diagnosis per value of config.sweep_param.
int cmd_sweep(const RunConfig& config);
/// Invariant suite; exit code 4 if any check fails.
int cmd_verify(const RunConfig& config);

/// Runs a command, mapping exceptions to exit codes (configuration and name
/// errors 2, nonconvergence and stalls 3, anything else 1) and printing the
/// message to stderr.
int run_guarded(const std::function<int()>& command);

struct InvariantCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst deviation seen, or a convergence ratio
  double tolerance = 0.0;
  std::string relation = "<=";  // how value is compared with tolerance
  nlohmann::json to_json() const;
};

/// Gram and basis checks for n = 2..6, projection identities on a random
/// battery of analytic fields, affine invariance of sweeps on a gridded field
/// and reference residuals of every catalog entry that has a closed form.
std::vector<InvariantCheck> invariant_suite(std::uint64_t seed, bool with_references = true);

}  // namespace semilinear
