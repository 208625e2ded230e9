// semilinear: solve, diagnose, sweep and verify from the command line.
//
//   semilinear solve --problem classical_obstacle_halfspace --grid 257 --out runs/obstacle
//   semilinear diagnose --problem log_counterexample_p --param p=0.5 --out runs/log
//   semilinear diagnose --solution runs/obstacle/solution.bin --out runs/stored
//   semilinear sweep --problem log_counterexample_p --sweep-param p --values 0.3,0.5,0.7
//   semilinear verify --out runs/verify

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semilinear/cli_reporter.hpp"
#include "semilinear/errors.hpp"
#include "semilinear/problem_catalog.hpp"

namespace {

struct Flags {
  std::string config;
  std::map<std::string, std::string> overrides;  // config key -> value
  std::vector<std::string> params;               // key=value
  std::vector<std::string> sets;                 // key=value, any config key
  std::string solution;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Config file (key = value, schema = 1)");
  auto key = [&f, cmd](const char* flag, const char* cfg_key, const char* help) {
    return cmd->add_option_function<std::string>(flag, [&f, cfg_key](const std::string& v) { f.overrides[cfg_key] = v; },
                                          help);
  };
  key("--problem", "problem", "Catalog name or 'inline'");
  key("--grid", "grid", "Grid size N (odd, >= 65 for solves)");
  key("--r0", "diag.r0", "Largest sweep radius, <= 1/4");
  key("--scales", "diag.scales", "Number of dyadic halvings J");
  key("--theta", "diag.theta", "Gamma^0 threshold and probe admissibility factor");
  key("--lattice", "diag.lattice", "Sample lattice points per axis");
  key("--out", "out", "Output directory");
  key("--seed", "seed", "Seed for randomized sampling");
  key("--format", "format", "Tabular output: csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--param", f.params, "Catalog parameter, key=value (repeatable)");
  cmd->add_option("--set", f.sets, "Any config key, key=value (repeatable)");
}

semilinear::RunConfig build_config(const Flags& f) {
  semilinear::RunConfig cfg = f.config.empty() ? semilinear::RunConfig{} : semilinear::RunConfig::load(f.config);
  auto split = [](const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw semilinear::ConfigError("expected key=value, got '" + kv + "'");
    return std::pair{kv.substr(0, eq), kv.substr(eq + 1)};
  };
  for (const auto& s : f.sets) {
    const auto [k, v] = split(s);
    cfg.set(k, v);
  }
  for (const auto& p : f.params) {
    const auto [k, v] = split(p);
    cfg.set("param." + k, v);
  }
  for (const auto& [k, v] : f.overrides) cfg.set(k, v);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semilinear elliptic solver and regularity diagnostics"};
  app.require_subcommand(1);
  Flags flags;
  std::string sweep_param;
  std::string sweep_values;

  auto* solve = app.add_subcommand("solve", "Solve a boundary-value problem and store the solution");
  add_common(solve, flags);
  auto* diagnose = app.add_subcommand("diagnose", "Dyadic sweeps, C^{1,1} certificate and free-boundary checks");
  add_common(diagnose, flags);
  diagnose->add_option("--solution", flags.solution, "Stored solution field (.bin or .csv)");
  auto* sweep = app.add_subcommand("sweep", "Diagnose a catalog entry over a parameter grid");
  add_common(sweep, flags);
  sweep->add_option("--sweep-param", sweep_param, "Catalog parameter to vary");
  sweep->add_option("--values", sweep_values, "Comma-separated parameter values");
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  add_common(verify, flags);
  auto* list = app.add_subcommand("list", "List catalog entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : semilinear::kExitConfig;
  }

  if (list->parsed()) {
    for (const auto& name : semilinear::list()) std::cout << name << "\n";
    return 0;
  }

  return semilinear::run_guarded([&] {
    semilinear::RunConfig cfg = build_config(flags);
    if (solve->parsed()) return semilinear::cmd_solve(cfg);
    if (diagnose->parsed()) {
      std::optional<std::filesystem::path> stored;
      if (!flags.solution.empty()) stored = flags.solution;
      return semilinear::cmd_diagnose(cfg, stored);
    }
    if (sweep->parsed()) {
      if (!sweep_param.empty()) cfg.set("sweep.param", sweep_param);
      if (!sweep_values.empty()) cfg.set("sweep.values", sweep_values);
      return semilinear::cmd_sweep(cfg);
    }
    return semilinear::cmd_verify(cfg);
  });
}
