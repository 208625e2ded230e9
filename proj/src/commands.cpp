#include "semilinear/cli_reporter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>

#include "semilinear/errors.hpp"
#include "semilinear/field.hpp"
#include "semilinear/harmonic_space.hpp"
#include "semilinear/problem_catalog.hpp"
#include "semilinear/projections.hpp"
#include "semilinear/quadrature.hpp"
#include "semilinear/regularity_diagnostics.hpp"
#include "semilinear/report.hpp"

namespace semilinear {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SolverConfig solver_for(const RunConfig& config, const CatalogEntry& entry) {
  SolverConfig s = config.solver();
  s.nonnegative_branch = entry.nonnegative_branch;
  return s;
}

std::function<bool(double, double)> guard_for(const CatalogEntry& entry, double h) {
  if (!entry.guard) return nullptr;
  return [g = entry.guard, h](double x1, double x2) { return g(x1, x2, h); };
}

double reference_error(const CatalogEntry& entry, const ScalarField& u) {
  double err = 0.0;
  const int n = u.grid_size();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (u.in_mask(i, j)) err = std::max(err, std::abs(u.at(i, j) - entry.reference->value(u.coord(i), u.coord(j))));
  return err;
}

std::vector<double> probe_radii(double r0, double h) {
  std::vector<double> radii;
  for (double f : {1.0, 0.75, 0.5, 0.375, 0.25})
    if (r0 * f >= kMinScaleInSpacings * h - 1e-12) radii.push_back(r0 * f);
  return radii;
}

Series sweep_series(const std::string& name, const ScaleSweep& sweep) {
  Series s{name, {}, {}};
  for (const auto& rec : sweep.records) {
    s.x.push_back(std::log(1.0 / rec.radius));
    s.y.push_back(rec.sup_pi);
  }
  return s;
}

std::string sweeps_csv(const std::vector<ScaleSweep>& sweeps) {
  std::string text = sweep_csv_header();
  for (const auto& s : sweeps) text += s.to_csv_rows();
  return text;
}

void write_table(ArtifactWriter& out, const std::string& stem, const std::string& format, const std::string& csv,
                 const json& rows) {
  if (format == "csv")
    out.text(stem + ".csv", csv);
  else
    out.json(stem + ".json", rows);
}

json probes_json(const std::vector<MonotonicityRecord>& probes) {
  json rows = json::array();
  for (const auto& p : probes)
    rows.push_back({{"y", {p.base_point.x(), p.base_point.y()}},
                    {"r", p.radius},
                    {"T", p.t_norm},
                    {"energy_derivative", p.energy_deriv},
                    {"grad_norm", p.grad_norm},
                    {"admissible", p.admissible}});
  return rows;
}

std::string probes_csv(const std::vector<MonotonicityRecord>& probes) {
  std::string text = "y1,y2,r,T,energy_derivative,grad_norm,admissible\n";
  for (const auto& p : probes)
    text += num(p.base_point.x()) + "," + num(p.base_point.y()) + "," + num(p.radius) + "," + num(p.t_norm) + "," +
            num(p.energy_deriv) + "," + num(p.grad_norm) + "," + (p.admissible ? "1" : "0") + "\n";
  return text;
}

// The diagnosis shared by cmd_diagnose and cmd_sweep.
struct Diagnosis {
  DiagnosticsReport report;
  ScaleSweep origin;
  std::optional<double> exponent_offset;  // fit in log(1/r) - 1/4
  bool certified = false;                  // certificate computed at all
  json extras = json::object();
  std::vector<MonotonicityRecord> probes;
  std::vector<DensityRecord> density;
};

Diagnosis diagnose_field(const RunConfig& config, const CatalogEntry* entry, const FieldPtr& field,
                         const ScalarField& grid, const Solution* sol, bool light) {
  Diagnosis d;
  const double r0 = entry ? config.radius0(*entry) : (config.r0 != 0.0 ? config.r0 : 0.25);
  const int scales = entry ? config.scale_count(*entry) : (config.scales != 0 ? config.scales : 4);
  const double h = field->resolution();
  d.report.problem = entry ? entry->name : "stored";
  const bool has_phases = entry && entry->rhs.kind != RhsKind::continuous;

  std::vector<Eigen::Vector2d> points = sample_lattice(config.lattice, 0.5);
  if (has_phases || (!entry && !light)) {
    ScalarField chi;
    if (sol && entry) chi = coincidence_fraction(*sol, entry->rhs);
    FreeBoundarySet fb = extract_free_boundary(grid, config.theta, r0, sol && entry ? &chi : nullptr);
    if (has_phases) {
      for (const auto& p : fb.points)
        if (p.x.norm() <= 0.5) points.push_back(p.x);
      if (!light) {
        d.probes = free_boundary_probes(*field, fb, probe_radii(r0, h), config.theta);
        const double kappa = empirical_threshold(d.probes);
        int admissible = 0;
        int above = 0;
        int above_positive = 0;
        for (const auto& p : d.probes) {
          if (!p.admissible) continue;
          ++admissible;
          if (p.t_norm > kappa) {
            ++above;
            above_positive += p.energy_deriv > 1e-8;
          }
        }
        d.extras["monotonicity"] = {{"probes", d.probes.size()},
                                    {"admissible", admissible},
                                    {"kappa_emp", kappa},
                                    {"above_kappa", above},
                                    {"above_kappa_positive", above_positive}};
      }
    }
    d.report.free_boundary = std::move(fb);
  }

  SweepOptions opts;
  opts.with_energy = !light;
  d.origin = dyadic_sweep(*field, Eigen::Vector2d::Zero(), r0, scales, opts);
  for (const auto& y : points) d.report.sweeps.push_back(dyadic_sweep(*field, y, r0, scales, opts));

  try {
    d.report.growth_exponent = growth_exponent_fit(d.origin);
    d.exponent_offset = growth_exponent_fit(d.origin, 0.25);
  } catch (const InvalidDimensionError&) {
    // the origin is a flat point; no exponent to report
  }
  if (d.origin.records.size() >= 5) d.report.origin_fit = log_bound_fit(d.origin);

  const bool long_enough = std::all_of(d.report.sweeps.begin(), d.report.sweeps.end(),
                                       [](const ScaleSweep& s) { return s.records.size() >= 4; });
  if (long_enough) {
    d.report.certificate = c11_certificate(d.report.sweeps, field.get());
    d.certified = true;
  }

  std::vector<double> radii = d.origin.radii();
  if (!light) d.report.growth = quadratic_growth(*field, Eigen::Vector2d::Zero(), radii);

  if (entry && !light) {
    if (entry->rhs.kind == RhsKind::continuous && entry->rhs.flags.omega)
      d.report.assumption_a = check_assumption_A(entry->rhs, {-1.0, -0.5, 0.0, 0.5, 1.0}, 0.5);
    if (entry->rhs.kind != RhsKind::continuous) d.report.assumption_b = check_assumption_B(entry->rhs);
  }

  if (sol && entry && entry->rhs.kind == RhsKind::no_sign && !light && d.report.free_boundary &&
      !d.report.free_boundary->points.empty()) {
    // base point: the free-boundary point nearest the origin
    Eigen::Vector2d y = d.report.free_boundary->points.front().x;
    for (const auto& p : d.report.free_boundary->points)
      if (p.x.norm() < y.norm()) y = p.x;
    std::vector<double> dr;
    for (double f : {1.0, 0.5, 0.25})
      if (r0 * f >= kMinScaleInSpacings * h - 1e-12 && r0 * f <= 1.0 - y.norm()) dr.push_back(r0 * f);
    d.density = coincidence_density(*sol, entry->rhs, y, dr);
    json dens = json::array();
    for (const auto& rec : d.density)
      dens.push_back({{"r", rec.radius}, {"lambda", rec.lambda}, {"ratio", rec.ratio}, {"q_norm", rec.q_norm}});
    json dec = json::array();
    const double tol = std::max(1e-5, 20.0 * h * h);
    for (double r : dr) {
      const Decomposition dc = decompose_no_sign(*sol, entry->rhs, y, r);
      dec.push_back({{"r", dc.radius},
                     {"reconstruction_error", dc.reconstruction_error},
                     {"tolerance", tol},
                     {"z_sup", dc.z_sup},
                     {"hessian_z_l2", dc.hessian_z_l2}});
    }
    d.extras["no_sign"] = {{"base_point", {y.x(), y.y()}}, {"coincidence_density", dens}, {"decomposition", dec}};
  }

  std::string verdict;
  if (!d.certified) {
    verdict = "C11 certificate not evaluated: fewer than 4 resolved scales (refine the grid or raise r0)";
  } else if (d.report.certificate.bounded) {
    verdict = "C11 certified: sup_pi bounded down to r = " + num(d.report.certificate.smallest_certified_scale);
  } else {
    const auto& c = d.report.certificate;
    verdict = "C11 certificate refused: trend " + num(c.max_trend_slope) + " per halving exceeds " +
              num(c.tol_slope) + " at (" + num(c.worst_point.x()) + ", " + num(c.worst_point.y()) + ")";
  }
  if (d.report.growth_exponent) verdict += "; growth exponent at origin " + num(*d.report.growth_exponent);
  d.report.verdict = verdict;

  if (entry) {
    d.extras["expected"] = {{"c11", entry->expected.c11}, {"assumptions", entry->expected.assumption_flags}};
    if (entry->expected.growth_exponent) d.extras["expected"]["growth_exponent"] = *entry->expected.growth_exponent;
    if (d.certified && entry->expected.c11 != "unknown")
      d.extras["matches_expected"] = (entry->expected.c11 == "yes") == d.report.certificate.bounded;
  }
  d.extras["origin_sweep"] = d.origin.to_json();
  if (d.exponent_offset) d.extras["growth_exponent_offset_quarter"] = *d.exponent_offset;
  d.extras["r0"] = r0;
  d.extras["scales"] = scales;
  d.extras["spacing"] = h;
  return d;
}

}  // namespace

json InvariantCheck::to_json() const {
  return {{"name", name}, {"passed", passed}, {"value", value}, {"relation", relation}, {"tolerance", tolerance}};
}

int run_guarded(const std::function<int()>& command) {
  try {
    return command();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnknownNameError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const SolverStallError& e) {
    std::cerr << "linear solver stalled: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_solve(const RunConfig& config) {
  const auto t0 = Clock::now();
  config.validate();
  const CatalogEntry entry = config.entry();
  if (!entry.solvable) throw ConfigError("'" + entry.name + "' is a closed-form field, not a boundary-value problem");
  const int n = config.grid_size(entry);
  if (n < 65 || n % 2 == 0) throw ConfigError("grid must be odd and >= 65");
  OutputLock lock(config.out);
  ArtifactWriter out(config.out);

  const Solution sol = solve(entry.rhs, entry.boundary, n, solver_for(config, entry));
  const double h = sol.u.spacing();
  json results = {{"problem", entry.to_json()}, {"grid", n}, {"spacing", h}, {"solve", sol.report.to_json()}};
  results["pde_residual"] =
      pde_residual(sol.u, [&](double x1, double x2, double t) { return entry.rhs(x1, x2, t); }, entry.outer_margin,
                   entry.exclude_free_boundary, guard_for(entry, h));
  if (entry.reference) results["reference_sup_error"] = reference_error(entry, sol.u);
  int zero = 0;
  int positive = 0;
  int negative = 0;
  for (auto p : sol.phase) {
    zero += p == kZero;
    positive += p == kPositive;
    negative += p == kNegative;
  }
  results["phases"] = {{"zero", zero}, {"positive", positive}, {"negative", negative}};

  write_field_binary(sol.u, (out.dir() / "solution.bin").string());
  out.record("solution.bin");
  if (config.format == "csv") {
    write_field_csv(sol.u, (out.dir() / "solution.csv").string());
    out.record("solution.csv");
  } else {
    out.json("solution.json", {{"grid", n}, {"spacing", h}, {"values", sol.u.values()}, {"phase", sol.phase}});
  }
  out.json("solve.json", results);
  auto files = out.files();
  out.json("manifest.json", make_manifest("solve", config,
                                          {{"iterations", sol.report.iterations},
                                           {"residuals", sol.report.residual_trace},
                                           {"sign_flips", sol.report.sign_flips}},
                                          files, seconds_since(t0)));
  std::cout << entry.name << ": N = " << n << ", " << sol.report.iterations << " iterations";
  if (entry.reference) std::cout << ", reference error " << results["reference_sup_error"].get<double>();
  std::cout << "\n";
  return kExitOk;
}

int cmd_diagnose(const RunConfig& config, const std::optional<std::filesystem::path>& stored) {
  const auto t0 = Clock::now();
  config.validate(!stored.has_value());
  std::optional<CatalogEntry> entry;
  if (!config.problem.empty()) entry = config.entry();

  ScalarField grid;
  FieldPtr field;
  std::optional<Solution> sol;
  json solve_info;
  if (stored) {
    const std::string ext = stored->extension().string();
    grid = ext == ".csv" ? read_field_csv(stored->string()) : read_field_binary(stored->string());
    field = make_grid_field(grid);
  } else {
    const int n = config.grid_size(*entry);
    if (entry->solvable && (n < 65 || n % 2 == 0)) throw ConfigError("grid must be odd and >= 65");
    PreparedField pf = prepare_field(*entry, n, solver_for(config, *entry));
    grid = std::move(pf.grid);
    field = pf.field;
    sol = std::move(pf.solution);
    if (sol) solve_info = sol->report.to_json();
  }
  OutputLock lock(config.out);
  ArtifactWriter out(config.out);

  Diagnosis d = diagnose_field(config, entry ? &*entry : nullptr, field, grid, sol ? &*sol : nullptr, false);
  json report = d.report.to_json();
  for (auto& [k, v] : d.extras.items()) report[k] = v;
  report["grid"] = grid.grid_size();
  if (!solve_info.is_null()) report["solve"] = solve_info;
  out.json("report.json", report);

  json sweep_rows = json::array();
  for (const auto& s : d.report.sweeps) sweep_rows.push_back(s.to_json());
  write_table(out, "sweeps", config.format, sweeps_csv(d.report.sweeps), sweep_rows);

  Chart growth{"sup |Pi| along dyadic scales", "log(1/r)", "sup_B1 |Pi_y(u,r)|", {sweep_series("origin", d.origin)}};
  if (d.certified) {
    for (const auto& s : d.report.sweeps)
      if (s.base_point == d.report.certificate.worst_point) {
        growth.series.push_back(sweep_series("worst point", s));
        break;
      }
  }
  out.svg("sup_pi_vs_log_inv_r.svg", growth);

  if (!d.probes.empty()) {
    write_table(out, "probes", config.format, probes_csv(d.probes), probes_json(d.probes));
    // the eight base points with the largest T at the first radius
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < d.probes.size(); ++k)
      if (k == 0 || d.probes[k].base_point != d.probes[k - 1].base_point) starts.push_back(k);
    std::stable_sort(starts.begin(), starts.end(),
                     [&](std::size_t a, std::size_t b) { return d.probes[a].t_norm > d.probes[b].t_norm; });
    Chart mono{"Circle norm of Q along scales", "r", "T_y(r)", {}};
    for (std::size_t s = 0; s < std::min<std::size_t>(8, starts.size()); ++s) {
      const auto& y = d.probes[starts[s]].base_point;
      Series series{"y=(" + num(std::round(y.x() * 1e3) / 1e3) + "," + num(std::round(y.y() * 1e3) / 1e3) + ")", {}, {}};
      for (std::size_t k = starts[s]; k < d.probes.size() && d.probes[k].base_point == y; ++k) {
        series.x.push_back(d.probes[k].radius);
        series.y.push_back(d.probes[k].t_norm);
      }
      mono.series.push_back(std::move(series));
    }
    out.svg("T_vs_r.svg", mono);
  }
  if (!d.density.empty()) {
    Series s{"lambda_r", {}, {}};
    for (const auto& rec : d.density) {
      s.x.push_back(rec.radius);
      s.y.push_back(rec.lambda);
    }
    out.svg("lambda_vs_r.svg", Chart{"Coincidence density", "r", "|Lambda_r|", {s}});
  }

  auto files = out.files();
  json summary = {{"verdict", d.report.verdict}};
  if (d.certified) summary["c11_bounded"] = d.report.certificate.bounded;
  if (d.report.growth_exponent) summary["growth_exponent"] = *d.report.growth_exponent;
  out.json("manifest.json", make_manifest("diagnose", config, summary, files, seconds_since(t0)));
  std::cout << d.report.problem << ": " << d.report.verdict << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& config) {
  const auto t0 = Clock::now();
  config.validate();
  if (config.sweep_param.empty() || config.sweep_values.empty())
    throw ConfigError("sweep needs sweep.param and sweep.values");
  if (config.problem == "inline") throw ConfigError("sweeps run over catalog parameters");
  OutputLock lock(config.out);
  ArtifactWriter out(config.out);

  json rows = json::array();
  std::string csv = "value,growth_exponent,growth_exponent_offset,c11_bounded,max_trend_slope,tol_slope\n";
  Chart chart{"sup |Pi| at the origin", "log(1/r)", "sup_B1 |Pi_0(u,r)|", {}};
  for (double v : config.sweep_values) {
    RunConfig point = config;
    point.params[config.sweep_param] = v;
    const CatalogEntry entry = point.entry();
    const int n = point.grid_size(entry);
    PreparedField pf = prepare_field(entry, n, solver_for(point, entry));
    Diagnosis d = diagnose_field(point, &entry, pf.field, pf.grid, pf.solution ? &*pf.solution : nullptr, true);
    json row = {{"value", v}, {"verdict", d.report.verdict}, {"origin_sweep", d.origin.to_json()}};
    if (d.report.growth_exponent) row["growth_exponent"] = *d.report.growth_exponent;
    if (d.exponent_offset) row["growth_exponent_offset"] = *d.exponent_offset;
    if (d.certified) row["c11_certificate"] = d.report.certificate.to_json();
    rows.push_back(row);
    csv += num(v) + "," + (d.report.growth_exponent ? num(*d.report.growth_exponent) : "") + "," +
           (d.exponent_offset ? num(*d.exponent_offset) : "") + "," +
           (d.certified ? (d.report.certificate.bounded ? "1" : "0") : "") + "," +
           (d.certified ? num(d.report.certificate.max_trend_slope) : "") + "," +
           (d.certified ? num(d.report.certificate.tol_slope) : "") + "\n";
    chart.series.push_back(sweep_series(config.sweep_param + "=" + num(v), d.origin));
    std::cout << config.problem << " " << config.sweep_param << " = " << v << ": " << d.report.verdict << "\n";
  }
  out.json("sweep_report.json", {{"problem", config.problem}, {"param", config.sweep_param}, {"rows", rows}});
  write_table(out, "sweep", config.format, csv, rows);
  out.svg("sweep_sup_pi.svg", chart);
  auto files = out.files();
  out.json("manifest.json", make_manifest("sweep", config, {{"values", config.sweep_values}}, files, seconds_since(t0)));
  return kExitOk;
}

std::vector<InvariantCheck> invariant_suite(std::uint64_t seed, bool with_references) {
  std::vector<InvariantCheck> checks;
  auto add = [&](std::string name, double value, double tol) {
    checks.push_back({std::move(name), value <= tol, value, tol});
  };

  // basis dimension and Gram matrices against independent quadrature
  for (int n = 2; n <= 6; ++n) {
    const auto basis = build_basis(n);
    add("basis_dimension_n" + std::to_string(n),
        std::abs(static_cast<double>(basis->size()) - (n * (n + 1) / 2 - 1)), 0.0);
    // integral over the sphere of (x.Ax)(x.Bx) = |S| (2 tr(AB) + trA trB) / (n (n + 2))
    double dev = 0.0;
    for (std::size_t i = 0; i < basis->size(); ++i)
      for (std::size_t j = 0; j < basis->size(); ++j) {
        const Eigen::MatrixXd& a = basis->element(i);
        const Eigen::MatrixXd& b = basis->element(j);
        const double expect =
            unit_sphere_area(n) * (2.0 * (a * b).trace() + a.trace() * b.trace()) / (n * (n + 2.0));
        dev = std::max(dev, std::abs(basis->gram_sphere()(i, j) - expect));
      }
    add("gram_sphere_n" + std::to_string(n), dev, 1e-10);
  }
  {
    const auto basis = basis_for(2);
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (const auto& node : circle_rule(512)) {
      const double q0 = node.x1 * node.x2;
      const double q1 = node.x1 * node.x1 - node.x2 * node.x2;
      g(0, 0) += node.weight * q0 * q0;
      g(0, 1) += node.weight * q0 * q1;
      g(1, 1) += node.weight * q1 * q1;
    }
    g(1, 0) = g(0, 1);
    add("gram_sphere_n2_quadrature", (g - basis->gram_sphere()).cwiseAbs().maxCoeff(), 1e-10);
    // D^2 q_k is constant, so the ball entries are |B1| times the Hessian products
    Eigen::Matrix2d gb = Eigen::Matrix2d::Zero();
    for (const auto& node : disk_rule(64, 128)) {
      const Eigen::Matrix2d h0 = (Eigen::Matrix2d() << 0, 1, 1, 0).finished();
      const Eigen::Matrix2d h1 = (Eigen::Matrix2d() << 2, 0, 0, -2).finished();
      gb(0, 0) += node.weight * (h0.array() * h0.array()).sum();
      gb(0, 1) += node.weight * (h0.array() * h1.array()).sum();
      gb(1, 1) += node.weight * (h1.array() * h1.array()).sum();
    }
    gb(1, 0) = gb(0, 1);
    add("gram_ball_n2_quadrature", (gb - basis->gram_ball()).cwiseAbs().maxCoeff(), 1e-10);
    add("gram_sphere_n2_closed_form",
        std::max(std::abs(basis->gram_sphere()(0, 0) - std::numbers::pi / 4),
                 std::abs(basis->gram_sphere()(1, 1) - std::numbers::pi)),
        1e-10);
  }

  // projection identities on random quadratics + affine and harmonic cubics
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto basis = basis_for(2);
  double pi_dev = 0.0;
  double q_dev = 0.0;
  double gram_dev = 0.0;
  double ident_dev = 0.0;
  double energy_dev = 0.0;
  double affine_dev = 0.0;
  for (int k = 0; k < 40; ++k) {
    const Eigen::Vector2d y(0.3 * unif(rng), 0.3 * unif(rng));
    const double r = 0.1 + 0.15 * (unif(rng) + 1.0) / 2.0;
    FieldPtr u;
    Eigen::Matrix2d expect_a;
    if (k % 2 == 0) {
      const double a11 = unif(rng), a12 = unif(rng), a22 = unif(rng);
      u = add_affine(quadratic_field(a11, a12, a22), unif(rng), {unif(rng), unif(rng)});
      expect_a << a11, a12, a12, a22;
    } else {
      // u = a Re(z^3) + b Im(z^3); D^2 u(y) / 2 is the exact projection
      const double a = unif(rng), b = unif(rng);
      u = std::make_shared<AnalyticField>(
          [a, b](double x, double z) { return a * (x * x * x - 3 * x * z * z) + b * (3 * x * x * z - z * z * z); },
          [a, b](double x, double z) {
            return Eigen::Vector2d(a * (3 * x * x - 3 * z * z) + b * 6 * x * z,
                                   a * (-6 * x * z) + b * (3 * x * x - 3 * z * z));
          },
          [a, b](double x, double z) {
            Eigen::Matrix2d hs;
            hs << 6 * a * x + 6 * b * z, -6 * a * z + 6 * b * x, -6 * a * z + 6 * b * x, -6 * a * x - 6 * b * z;
            return hs;
          });
      expect_a = 0.5 * u->hessian(y.x(), y.y());
    }
    expect_a -= 0.5 * expect_a.trace() * Eigen::Matrix2d::Identity();
    const P2Element expect = P2Element::from_matrix(basis, expect_a);
    const ProjectionResult pi = pi_projection(*u, y, r);
    const ProjectionResult q = q_projection(*u, y, r);
    pi_dev = std::max(pi_dev, (pi.element - expect).sup_ball());
    q_dev = std::max(q_dev, (q.element - expect).sup_ball());
    gram_dev = std::max(gram_dev, (pi_projection_gram(*u, y, r).element - pi.element).sup_ball());
    const P2Element probe(basis, Eigen::Vector2d(unif(rng), unif(rng)));
    const auto [lhs, rhs] = integration_identity_check(*u, probe, y);
    ident_dev = std::max(ident_dev, std::abs(lhs - rhs));
    // T_y(r) is constant in r for these fields
    energy_dev = std::max(energy_dev, std::abs(energy_derivative(*u, y, r)));
    const FieldPtr shifted = add_affine(u, unif(rng), {unif(rng), unif(rng)});
    affine_dev = std::max(affine_dev, (pi_projection(*shifted, y, r).element - pi.element).sup_ball());
    affine_dev = std::max(affine_dev, (q_projection(*shifted, y, r).element - q.element).sup_ball());
  }
  add("pi_projection_exact", pi_dev, 1e-8);
  add("q_projection_exact", q_dev, 1e-8);
  add("pi_gram_path_agrees", gram_dev, 1e-8);
  add("integration_identity", ident_dev, 1e-8);
  add("energy_derivative_zero_for_static_fields", energy_dev, 1e-8);
  add("projection_affine_invariance", affine_dev, 1e-8);

  // affine invariance of dyadic sweeps on a gridded field
  {
    const auto cubic = [](double x, double z) { return 0.3 * x * x * x - 0.2 * x * z * z + 0.5 * x * z + 0.1 * z * z; };
    const ScalarField base = ScalarField::from_function(129, cubic);
    const double a0 = unif(rng), a1 = unif(rng), a2 = unif(rng);
    const ScalarField moved =
        ScalarField::from_function(129, [&](double x, double z) { return cubic(x, z) + a0 + a1 * x + a2 * z; });
    const FieldPtr fa = make_grid_field(base);
    const FieldPtr fb = make_grid_field(moved);
    double dev = 0.0;
    for (const auto& y : sample_lattice(5, 0.5)) {
      const ScaleSweep sa = dyadic_sweep(*fa, y, 0.25, 1);
      const ScaleSweep sb = dyadic_sweep(*fb, y, 0.25, 1);
      for (std::size_t j = 0; j < sa.records.size(); ++j) {
        dev = std::max(dev, std::abs(sa.records[j].sup_pi - sb.records[j].sup_pi));
        dev = std::max(dev, (sa.records[j].q - sb.records[j].q).sup_ball());
        dev = std::max(dev, std::abs(sa.records[j].energy_deriv - sb.records[j].energy_deriv));
      }
    }
    add("sweep_affine_invariance", dev, 1e-8);
  }

  if (with_references) {
    for (const auto& name : list()) {
      const CatalogEntry entry = get(name);
      const ReferenceReport rep = verify_reference(entry);
      if (!rep.available) continue;
      const double finest = rep.residuals.back().residual;
      if (finest <= 1e-6)
        checks.push_back({"reference_residual_" + name, true, finest, 1e-6});
      else
        checks.push_back({"reference_order_" + name, rep.passed, rep.ratio, 3.5, ">="});
    }
  }
  return checks;
}

int cmd_verify(const RunConfig& config) {
  const auto t0 = Clock::now();
  config.validate(false);
  OutputLock lock(config.out);
  ArtifactWriter out(config.out);
  std::vector<InvariantCheck> checks = invariant_suite(config.seed);
  if (!config.problem.empty()) {
    const CatalogEntry entry = config.entry();
    const ReferenceReport rep = verify_reference(entry);
    if (rep.available) {
      const double finest = rep.residuals.back().residual;
      if (finest <= 1e-6)
        checks.push_back({"reference_residual_configured", true, finest, 1e-6});
      else
        checks.push_back({"reference_order_configured", rep.passed, rep.ratio, 3.5, ">="});
    }
  }
  json rows = json::array();
  std::string csv = "name,passed,value,relation,tolerance\n";
  bool ok = true;
  for (const auto& c : checks) {
    rows.push_back(c.to_json());
    csv += c.name + "," + (c.passed ? "1" : "0") + "," + num(c.value) + "," + c.relation + "," + num(c.tolerance) + "\n";
    ok = ok && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.value << " " << c.relation << " " << c.tolerance << ")\n";
  }
  out.json("verify.json", {{"passed", ok}, {"checks", rows}});
  write_table(out, "checks", config.format, csv, rows);
  auto files = out.files();
  out.json("manifest.json", make_manifest("verify", config, {{"passed", ok}}, files, seconds_since(t0)));
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace semilinear
