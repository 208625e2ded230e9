#include "semilinear/regularity_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "semilinear/errors.hpp"
#include "semilinear/quadrature.hpp"

namespace semilinear {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Least-squares line y = a + b x; returns b and sets a.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept = nullptr) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double den = n * sxx - sx * sx;
  const double b = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  if (intercept) *intercept = (sy - b * sx) / n;
  return b;
}

double energy_from_q(const DifferentiableField& u, const P2Element& q, const Eigen::Vector2d& y, double r) {
  double total = 0.0;
  for (const auto& node : default_disk_rule())
    total += node.weight * q(node.x1, node.x2) * u.laplacian(r * node.x1 + y.x(), r * node.x2 + y.y());
  return 2.0 / r * total;
}

// Fraction of the square cell of side h centred at c lying in the disk B_r(y).
double cell_in_ball(const Eigen::Vector2d& c, double h, const Eigen::Vector2d& y, double r) {
  const Eigen::Vector2d d = (c - y).cwiseAbs();
  const Eigen::Vector2d far = d + Eigen::Vector2d::Constant(0.5 * h);
  if (far.squaredNorm() <= r * r) return 1.0;
  const Eigen::Vector2d near = (d - Eigen::Vector2d::Constant(0.5 * h)).cwiseMax(0.0);
  if (near.squaredNorm() >= r * r) return 0.0;
  constexpr int sub = 8;
  int inside = 0;
  for (int b = 0; b < sub; ++b)
    for (int a = 0; a < sub; ++a) {
      const double px = c.x() + h * ((a + 0.5) / sub - 0.5) - y.x();
      const double py = c.y() + h * ((b + 0.5) / sub - 0.5) - y.y();
      inside += px * px + py * py <= r * r;
    }
  return static_cast<double>(inside) / (sub * sub);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> ScaleSweep::radii() const {
  std::vector<double> out;
  for (const auto& r : records) out.push_back(r.radius);
  return out;
}

std::vector<double> ScaleSweep::sup_pi() const {
  std::vector<double> out;
  for (const auto& r : records) out.push_back(r.sup_pi);
  return out;
}

nlohmann::json ScaleSweep::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& rec : records) {
    const auto& pc = rec.pi.coeffs();
    nlohmann::json row = {{"r", rec.radius},
                          {"pi", std::vector<double>(pc.data(), pc.data() + pc.size())},
                          {"sup_pi", rec.sup_pi},
                          {"l2_q_sphere", rec.l2_q_sphere},
                          {"energy_deriv", rec.energy_deriv},
                          {"growth_ratio", rec.growth_ratio}};
    if (rec.q.basis()) {
      const auto& qc = rec.q.coeffs();
      row["q"] = std::vector<double>(qc.data(), qc.data() + qc.size());
    }
    rows.push_back(row);
  }
  return {{"y", {base_point.x(), base_point.y()}}, {"r0", r0},         {"J", requested_scales},
          {"truncated", truncated},                {"spacing", spacing}, {"records", rows}};
}

std::string sweep_csv_header() { return "y1,y2,r,c0,c1,l2_sphere,sup_B1,energy_derivative\n"; }

std::string ScaleSweep::to_csv_rows() const {
  std::string out;
  for (const auto& rec : records) {
    const Eigen::VectorXd c = rec.q.basis() ? rec.q.coeffs() : Eigen::VectorXd::Zero(2);
    out += fmt(base_point.x()) + "," + fmt(base_point.y()) + "," + fmt(rec.radius) + "," + fmt(c[0]) + "," +
           fmt(c[1]) + "," + fmt(rec.l2_q_sphere) + "," + fmt(rec.sup_pi) + "," + fmt(rec.energy_deriv) + "\n";
  }
  return out;
}

ScaleSweep dyadic_sweep(const DifferentiableField& u, const Eigen::Vector2d& y, double r0, int scales,
                        const SweepOptions& options) {
  if (y.norm() > 0.5 + 1e-12) throw OutOfDomainError("sweep base point must lie in B_1/2");
  if (!(r0 > 0.0) || r0 > 0.25 + 1e-12) throw OutOfDomainError("sweep r0 must lie in (0, 1/4]");
  if (scales < 0) throw InvalidDimensionError("number of scales must be non-negative");
  ScaleSweep sweep;
  sweep.base_point = y;
  sweep.r0 = r0;
  sweep.requested_scales = scales;
  sweep.spacing = u.resolution();
  const double h = u.resolution();
  for (int j = 0; j <= scales; ++j) {
    const double r = r0 * std::ldexp(1.0, -j);
    if (h > 0.0 && r < kMinScaleInSpacings * h * (1.0 - 1e-12)) {
      sweep.truncated = true;
      break;
    }
    const Rescaling resc = rescaling_at(u, y, r);
    SweepRecord rec;
    rec.radius = r;
    const ProjectionResult pi = pi_projection(u, resc);
    rec.pi = pi.element;
    rec.sup_pi = pi.sup_b1;
    if (options.with_q) {
      const ProjectionResult q = q_projection(u, resc);
      rec.q = q.element;
      rec.l2_q_sphere = q.l2_sphere;
      if (options.with_energy) rec.energy_deriv = energy_from_q(u, q.element, y, r);
    }
    if (!sweep.records.empty()) {
      const double prev = sweep.records.back().sup_pi;
      rec.growth_ratio = prev > 0.0 ? rec.sup_pi / prev : (rec.sup_pi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    }
    sweep.records.push_back(rec);
  }
  return sweep;
}

std::string to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::bounded: return "bounded";
    case GrowthVerdict::log_growth: return "log_growth";
    case GrowthVerdict::super_log: return "super_log";
  }
  return "unknown";
}

LogBoundFit log_bound_fit(const ScaleSweep& sweep, std::optional<double> tol_slope) {
  if (sweep.records.size() < 5) throw InvalidDimensionError("log_bound_fit needs at least 5 scales (J >= 4)");
  std::vector<double> l;
  std::vector<double> s = sweep.sup_pi();
  for (const auto& rec : sweep.records) l.push_back(std::log(1.0 / rec.radius));
  LogBoundFit fit;
  fit.tol_slope = tol_slope.value_or(0.02 * median(s));
  fit.c_fit = ls_slope(l, s, &fit.intercept);
  fit.slope_per_step = fit.c_fit * std::numbers::ln2;

  // quadratic fit s = a + b L + c L^2 by normal equations
  Eigen::MatrixXd a(static_cast<Eigen::Index>(l.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(l.size()));
  for (std::size_t k = 0; k < l.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    a(i, 0) = 1.0;
    a(i, 1) = l[k];
    a(i, 2) = l[k] * l[k];
    rhs[i] = s[k];
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(rhs);
  fit.curvature = coef[2];
  const double span = l.back() - l.front();
  if (fit.slope_per_step <= fit.tol_slope) fit.verdict = GrowthVerdict::bounded;
  else if (fit.curvature > 0.0 && fit.curvature * span * span > 0.25 * fit.c_fit * span)
    fit.verdict = GrowthVerdict::super_log;
  else fit.verdict = GrowthVerdict::log_growth;
  return fit;
}

double growth_exponent_fit(const ScaleSweep& sweep, double log_offset) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& rec : sweep.records) {
    const double l = std::log(1.0 / rec.radius) - log_offset;
    if (l <= 0.0 || rec.sup_pi <= 0.0) continue;
    x.push_back(std::log(l));
    y.push_back(std::log(rec.sup_pi));
  }
  if (x.size() < 2) throw InvalidDimensionError("growth exponent fit needs two positive records");
  return ls_slope(x, y);
}

std::vector<QuadraticGrowthRecord> quadratic_growth(const DifferentiableField& u, const Eigen::Vector2d& y,
                                                    const std::vector<double>& radii) {
  constexpr int rings = 16;
  constexpr int angles = 256;
  const double u0 = u.value(y.x(), y.y());
  const Eigen::Vector2d g0 = u.gradient(y.x(), y.y());
  std::vector<QuadraticGrowthRecord> out;
  for (double r : radii) {
    if (!(r > 0.0) || r > 1.0 - y.norm() + 1e-12) throw OutOfDomainError("quadratic_growth radius leaves the disk");
    double sup = 0.0;
    for (int k = 1; k <= rings; ++k) {
      const double rho = r * k / rings;
      for (int a = 0; a < angles; ++a) {
        const double th = 2.0 * std::numbers::pi * a / angles;
        const double d1 = rho * std::cos(th);
        const double d2 = rho * std::sin(th);
        sup = std::max(sup, std::abs(u.value(y.x() + d1, y.y() + d2) - u0 - d1 * g0.x() - d2 * g0.y()));
      }
    }
    QuadraticGrowthRecord rec;
    rec.radius = r;
    rec.sup_deviation = sup;
    rec.ratio_pure = sup / (r * r);
    rec.ratio_log = r < 1.0 ? sup / (r * r * std::log(1.0 / r)) : std::numeric_limits<double>::infinity();
    out.push_back(rec);
  }
  return out;
}

std::vector<Eigen::Vector2d> sample_lattice(int per_axis, double half_width) {
  std::vector<Eigen::Vector2d> pts;
  const double step = 2.0 * half_width / (per_axis - 1);
  for (int j = 0; j < per_axis; ++j)
    for (int i = 0; i < per_axis; ++i) {
      const Eigen::Vector2d p(-half_width + step * i, -half_width + step * j);
      if (p.norm() <= half_width + 1e-12) pts.push_back(p);
    }
  return pts;
}

nlohmann::json C11Certificate::to_json() const {
  nlohmann::json sens = nlohmann::json::array();
  for (const auto& [tol, ok] : sensitivity) sens.push_back({{"tol_slope", tol}, {"bounded", ok}});
  return {{"bounded", bounded},
          {"verdict", bounded ? "bounded" : "refused"},
          {"M_emp", m_emp},
          {"sup_hessian", sup_hessian},
          {"median_sup_pi", median_sup_pi},
          {"tol_slope", tol_slope},
          {"max_trend_slope", max_trend_slope},
          {"worst_point", {worst_point.x(), worst_point.y()}},
          {"smallest_certified_scale", smallest_certified_scale},
          {"points", points},
          {"sensitivity", sens}};
}

C11Certificate c11_certificate(const std::vector<ScaleSweep>& sweeps, const DifferentiableField* u) {
  C11Certificate cert;
  std::vector<double> all;
  for (const auto& s : sweeps)
    for (const auto& rec : s.records) {
      all.push_back(rec.sup_pi);
      cert.m_emp = std::max(cert.m_emp, rec.pi.hessian().norm());
    }
  cert.median_sup_pi = median(all);
  cert.tol_slope = 0.02 * cert.median_sup_pi;
  cert.max_trend_slope = -std::numeric_limits<double>::infinity();
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& s : sweeps) {
    if (s.records.size() < 4) throw InvalidDimensionError("c11_certificate needs at least 4 scales per point");
    std::vector<double> j;
    for (std::size_t k = 0; k < s.records.size(); ++k) j.push_back(static_cast<double>(k));
    // growth must persist to the finest step; a one-time rise that has
    // saturated (a ball that stopped straddling the free boundary) is bounded
    const std::vector<double> sp = s.sup_pi();
    const double slope = std::min(ls_slope(j, sp), sp[sp.size() - 1] - sp[sp.size() - 2]);
    if (slope > cert.max_trend_slope) {
      cert.max_trend_slope = slope;
      cert.worst_point = s.base_point;
    }
    smallest = std::min(smallest, s.records.back().radius);
    ++cert.points;
    if (u) cert.sup_hessian = std::max(cert.sup_hessian, u->hessian(s.base_point.x(), s.base_point.y()).norm());
  }
  if (cert.points == 0) cert.max_trend_slope = 0.0;
  cert.bounded = cert.max_trend_slope <= cert.tol_slope;
  cert.smallest_certified_scale = cert.bounded && std::isfinite(smallest) ? smallest : 0.0;
  for (double factor : {0.5, 1.0, 2.0})
    cert.sensitivity.emplace_back(factor * cert.tol_slope, cert.max_trend_slope <= factor * cert.tol_slope);
  return cert;
}

std::size_t FreeBoundarySet::count_gamma0() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return p.gamma0; }));
}

std::size_t FreeBoundarySet::count_gamma1() const { return points.size() - count_gamma0(); }

nlohmann::json FreeBoundarySet::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"x", {p.x.x(), p.x.y()}}, {"grad_norm", p.grad_norm}, {"gamma0", p.gamma0}});
  return {{"theta", theta},           {"r", radius},
          {"gamma0", count_gamma0()}, {"gamma1", count_gamma1()},
          {"max_abs_u", max_abs_u},   {"points", pts}};
}

ScalarField coincidence_fraction(const Solution& sol, const RhsSpec& rhs) {
  const ScalarField& u = sol.u;
  const int n = u.grid_size();
  ScalarField chi(n);
  auto phase_at = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= n || j >= n) return static_cast<std::int8_t>(kFixed);
    return sol.phase[static_cast<std::size_t>(j) * n + i];
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (phase_at(i, j) != kZero) continue;
      const double x1 = u.coord(i);
      const double x2 = u.coord(j);
      double g0 = 0.0;
      if (rhs.kind == RhsKind::no_sign) {
        g0 = rhs.g(x1, x2, 0.0);
      } else if (rhs.kind == RhsKind::two_phase) {
        bool pos = false;
        bool neg = false;
        for (const auto& [a, b] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
          pos = pos || phase_at(i + a, j + b) == kPositive;
          neg = neg || phase_at(i + a, j + b) == kNegative;
        }
        g0 = pos ? rhs.g1(x1, x2, 0.0) : (neg ? rhs.g2(x1, x2, 0.0) : 0.0);
      }
      chi.at(i, j) = g0 != 0.0 ? std::clamp(1.0 - sol.laplacian.at(i, j) / g0, 0.0, 1.0) : 1.0;
    }
  return chi;
}

FreeBoundarySet extract_free_boundary(const ScalarField& u, double theta, double r, const ScalarField* fraction) {
  FreeBoundarySet set;
  set.theta = theta;
  set.radius = r;
  const int n = u.grid_size();
  const double h = u.spacing();
  auto cls = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
  auto usable = [&](int i, int j) { return std::hypot(u.coord(i), u.coord(j)) <= 1.0 - 2.0 * h; };
  auto add = [&](const Eigen::Vector2d& p) {
    FreeBoundaryPoint fp;
    fp.x = p;
    fp.grad_norm = u.interpolate_gradient(p.x(), p.y()).norm();
    fp.gamma0 = fp.grad_norm < theta * r;
    set.max_abs_u = std::max(set.max_abs_u, std::abs(u.interpolate(p.x(), p.y())));
    set.points.push_back(fp);
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!usable(i, j)) continue;
      for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
        const int i2 = i + di;
        const int j2 = j + dj;
        if (i2 >= n || j2 >= n || !usable(i2, j2)) continue;
        const double a = u.at(i, j);
        const double b = u.at(i2, j2);
        const Eigen::Vector2d pa(u.coord(i), u.coord(j));
        const Eigen::Vector2d dir(di, dj);
        const int ca = cls(a);
        const int cb = cls(b);
        if (ca * cb < 0) {
          add(pa + dir * h * (a / (a - b)));
        } else if (ca == 0 && cb != 0) {
          const double chi = fraction ? fraction->at(i, j) : 0.5;
          add(pa + dir * h * (chi - 0.5));
        } else if (cb == 0 && ca != 0) {
          const double chi = fraction ? fraction->at(i2, j2) : 0.5;
          add(pa + dir * h * (1.0 - (chi - 0.5)));
        }
      }
    }
  return set;
}

std::vector<MonotonicityRecord> monotonicity_probe(const DifferentiableField& u, const Eigen::Vector2d& y,
                                                   const std::vector<double>& radii, double theta) {
  std::vector<MonotonicityRecord> out;
  const double grad = u.gradient(y.x(), y.y()).norm();
  for (double r : radii) {
    const ProjectionResult q = q_projection(u, y, r);
    MonotonicityRecord rec;
    rec.base_point = y;
    rec.radius = r;
    rec.t_norm = q.l2_sphere;
    rec.energy_deriv = energy_from_q(u, q.element, y, r);
    rec.grad_norm = grad;
    rec.admissible = grad < theta * r;
    out.push_back(rec);
  }
  return out;
}

std::vector<Eigen::Vector2d> critical_points(const DifferentiableField& u, double region) {
  std::vector<Eigen::Vector2d> found;
  for (const Eigen::Vector2d& seed : sample_lattice(17, region)) {
    Eigen::Vector2d x = seed;
    bool ok = false;
    for (int it = 0; it < 30 && x.norm() <= region; ++it) {
      const Eigen::Vector2d g = u.gradient(x.x(), x.y());
      if (g.norm() < 1e-6) {
        ok = true;
        break;
      }
      const Eigen::Matrix2d hs = u.hessian(x.x(), x.y());
      if (std::abs(hs.determinant()) < 1e-12) break;
      x -= hs.inverse() * g;
    }
    if (!ok || x.norm() > region) continue;
    if (std::none_of(found.begin(), found.end(), [&](const auto& f) { return (f - x).norm() < 1e-3; }))
      found.push_back(x);
  }
  return found;
}

std::vector<MonotonicityRecord> free_boundary_probes(const DifferentiableField& u, const FreeBoundarySet& gamma,
                                                     const std::vector<double>& radii, double theta, double region) {
  std::vector<Eigen::Vector2d> ys;
  for (const auto& p : gamma.points)
    if (p.x.norm() <= region) ys.push_back(p.x);
  for (const auto& c : critical_points(u, region)) ys.push_back(c);
  std::vector<MonotonicityRecord> out;
  for (const auto& y : ys) {
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& p : gamma.points) dist = std::min(dist, (p.x - y).norm());
    for (auto rec : monotonicity_probe(u, y, radii, theta)) {
      rec.admissible = rec.admissible && dist < rec.radius;
      out.push_back(rec);
    }
  }
  return out;
}

double empirical_threshold(const std::vector<MonotonicityRecord>& records) {
  double kappa = 0.0;
  for (const auto& rec : records)
    if (rec.admissible && rec.energy_deriv <= 0.0) kappa = std::max(kappa, rec.t_norm);
  return kappa;
}

double positive_part_integral(const P2Element& q) {
  if (q.dim_ambient() != 2) throw InvalidDimensionError("positive_part_integral is planar");
  // q = rho^2 (c1 cos 2th + (c0/2) sin 2th) = rho^2 R cos(2th - phi)
  const double amplitude = std::hypot(q.coeffs()[1], 0.5 * q.coeffs()[0]);
  return 0.5 * amplitude;
}

DiniResult dini_integral(const std::function<double(double)>& omega, double epsilon, double t_min) {
  if (!(epsilon > t_min) || !(t_min > 0.0)) throw InvalidModulusError("Dini check needs 0 < t_min < epsilon");
  constexpr int samples = 200;
  double prev = omega(t_min);
  for (int k = 1; k <= samples; ++k) {
    const double t = t_min * std::pow(epsilon / t_min, static_cast<double>(k) / samples);
    const double v = omega(t);
    if (!std::isfinite(v) || v < prev - 1e-14 * std::max(1.0, std::abs(prev)))
      throw InvalidModulusError("modulus is not nondecreasing on the sample grid");
    prev = v;
  }
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(64, gx, gw);
  const double s_lo = -std::log(epsilon);
  const double s_hi = -std::log(t_min);
  constexpr int intervals = 10;
  const double l0 = (s_hi - s_lo) / (std::ldexp(1.0, intervals) - 1.0);
  DiniResult res;
  double total = 0.0;
  for (int k = 0; k < intervals; ++k) {
    const double a = s_lo + (std::ldexp(1.0, k) - 1.0) * l0;
    const double b = s_lo + (std::ldexp(1.0, k + 1) - 1.0) * l0;
    double inc = 0.0;
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
      inc += 0.5 * (b - a) * gw[q] * omega(std::exp(-s));
    }
    res.increments.push_back(inc);
    total += inc;
  }
  const double last = res.increments[intervals - 1];
  const double before = res.increments[intervals - 2];
  res.ratio = before > 0.0 ? last / before : 0.0;
  if (res.ratio >= 0.97) {
    res.divergent = true;
    res.integral = std::numeric_limits<double>::infinity();
    return res;
  }
  // tail beyond t_min: local power law omega(e^-s) ~ C s^-p in s
  const double w_hi = omega(std::exp(-s_hi));
  const double w_in = omega(std::exp(-s_hi / 1.01));
  double tail = 0.0;
  if (w_hi > 0.0 && w_in > 0.0) {
    const double p_eff = std::log(w_in / w_hi) / std::log(1.01);
    tail = p_eff > 1.0 ? w_hi * s_hi / (p_eff - 1.0) : last * res.ratio / (1.0 - res.ratio);
  }
  res.integral = total + tail;
  return res;
}

AssumptionAResult check_assumption_A(const RhsSpec& rhs, const std::vector<double>& t_grid, double epsilon,
                                     int grid_size, double region) {
  AssumptionAResult out;
  out.t_grid = t_grid;
  if (rhs.flags.omega) out.dini = dini_integral(rhs.flags.omega, epsilon);
  for (double t : t_grid) {
    const ScalarField density = ScalarField::from_function(grid_size, [&](double x1, double x2) { return rhs(x1, x2, t); });
    const ScalarField v = newtonian_potential(density);
    const auto hess = fd_hessian(v);
    for (int j = 0; j < grid_size; ++j)
      for (int i = 0; i < grid_size; ++i) {
        if (std::hypot(v.coord(i), v.coord(j)) > region) continue;
        const double xx = hess[0].at(i, j);
        const double xy = hess[1].at(i, j);
        const double yy = hess[3].at(i, j);
        out.potential_sup = std::max(out.potential_sup, std::sqrt(xx * xx + 2.0 * xy * xy + yy * yy));
      }
  }
  return out;
}

double check_assumption_B(const RhsSpec& rhs, int grid_size) {
  // one-sided limits in t through the composite evaluator
  constexpr double tiny = 1e-300;
  const ScalarField grid(grid_size);
  double margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid_size; ++j)
    for (int i = 0; i < grid_size; ++i) {
      if (!grid.in_mask(i, j)) continue;
      const double x1 = grid.coord(i);
      const double x2 = grid.coord(j);
      margin = std::min(margin, rhs(x1, x2, tiny) - rhs(x1, x2, -tiny));
    }
  return margin;
}

std::vector<DensityRecord> coincidence_density(const Solution& sol, const RhsSpec& rhs, const Eigen::Vector2d& y,
                                               const std::vector<double>& radii) {
  const ScalarField chi = coincidence_fraction(sol, rhs);
  const int n = chi.grid_size();
  const double h = chi.spacing();
  auto lambda = [&](double r) {
    double area = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double c = chi.at(i, j);
        if (c == 0.0) continue;
        area += c * cell_in_ball({chi.coord(i), chi.coord(j)}, h, y, r) * h * h;
      }
    return area / (r * r);
  };
  const GridField field(sol.u);
  std::vector<DensityRecord> out;
  for (double r : radii) {
    DensityRecord rec;
    rec.radius = r;
    rec.lambda = lambda(r);
    const double half = lambda(0.5 * r);
    rec.ratio = rec.lambda > 0.0 ? half / rec.lambda : 0.0;
    rec.q_norm = q_projection(field, rescaling_at(field, y, r), QVariant::raw).l2_sphere;
    out.push_back(rec);
  }
  return out;
}

Decomposition decompose_no_sign(const Solution& sol, const RhsSpec& rhs, const Eigen::Vector2d& y, double r) {
  if (rhs.kind != RhsKind::no_sign) throw ConfigError("decomposition needs a no-sign right-hand side");
  const ScalarField& u = sol.u;
  const int n = u.grid_size();
  const double h = u.spacing();
  const int iy = static_cast<int>(std::lround((y.x() + 1.0) / h));
  const int jy = static_cast<int>(std::lround((y.y() + 1.0) / h));
  const int k = static_cast<int>(std::lround(r / h));
  if (k < static_cast<int>(kMinScaleInSpacings)) throw UnderResolvedScaleError(r, h);
  Decomposition dec;
  dec.base_point = {u.coord(iy), u.coord(jy)};
  dec.radius = k * h;
  const double rr = dec.radius;
  if (rr > 1.0 - dec.base_point.norm() + 1e-12) throw OutOfDomainError("decomposition ball leaves the unit disk");
  const int m = 2 * k + 1;
  const double inv_r2 = 1.0 / (rr * rr);
  const Eigen::Vector2d yb = dec.base_point;

  ScalarField big(m);
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) big.at(a, b) = u.at(iy + a - k, jy + b - k) * inv_r2;
  dec.rescaled = big;
  const BoundaryFunction big_boundary = [&](double x1, double x2) {
    return u.interpolate(rr * x1 + yb.x(), rr * x2 + yb.y()) * inv_r2;
  };

  const GridField field(u);
  Rescaling resc;
  resc.base_point = yb;
  resc.radius = rr;
  dec.q = q_projection(field, resc, QVariant::raw).element;

  const DiskLaplacian op(m);
  const Eigen::VectorXd mu = op.apply(op.restrict(big), big_boundary);
  ScalarField rhs_h(m);
  ScalarField rhs_w(m);
  ScalarField rhs_z(m);
  for (int idx = 0; idx < op.unknowns(); ++idx) {
    const auto [a, b] = op.node(idx);
    const int i = iy + a - k;
    const int j = jy + b - k;
    const double z1 = u.coord(i);
    const double z2 = u.coord(j);
    const double g0 = rhs.g(z1, z2, 0.0);
    double chi = 0.0;
    if (sol.phase[static_cast<std::size_t>(j) * n + i] == kZero)
      chi = g0 != 0.0 ? std::clamp(1.0 - mu[idx] / g0, 0.0, 1.0) : 1.0;
    rhs_h.at(a, b) = -g0 * chi;
    rhs_w.at(a, b) = g0;
    rhs_z.at(a, b) = (rhs.g(z1, z2, u.at(i, j)) - g0) * (1.0 - chi);
  }
  const P2Element q = dec.q;
  const BoundaryFunction zero = [](double, double) { return 0.0; };
  dec.h = solve_dirichlet(rhs_h, zero);
  dec.w = solve_dirichlet(rhs_w, [&](double x1, double x2) { return big_boundary(x1, x2) - q(x1, x2); });
  dec.z = solve_dirichlet(rhs_z, zero);

  const auto hz = fd_hessian(dec.z);
  const double hb = big.spacing();
  double hz2 = 0.0;
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      const double x1 = big.coord(a);
      const double x2 = big.coord(b);
      if (std::hypot(x1, x2) > 0.5 + 1e-12) continue;
      const double recon = q(x1, x2) + dec.h.at(a, b) + dec.w.at(a, b) + dec.z.at(a, b);
      dec.reconstruction_error = std::max(dec.reconstruction_error, std::abs(recon - big.at(a, b)));
      dec.z_sup = std::max(dec.z_sup, std::abs(dec.z.at(a, b)));
      hz2 += (hz[0].at(a, b) * hz[0].at(a, b) + 2.0 * hz[1].at(a, b) * hz[1].at(a, b) + hz[3].at(a, b) * hz[3].at(a, b)) *
             hb * hb;
    }
  dec.hessian_z_l2 = std::sqrt(hz2);
  return dec;
}

double telescoping_excess(const ScaleSweep& sweep) {
  if (sweep.records.empty()) return 0.0;
  double worst = 0.0;
  for (const auto& rec : sweep.records) worst = std::max(worst, rec.sup_pi - sweep.records.front().sup_pi);
  return worst;
}

nlohmann::json DiagnosticsReport::to_json() const {
  nlohmann::json j;
  j["problem"] = problem;
  j["verdict"] = verdict;
  j["c11_certificate"] = certificate.to_json();
  if (growth_exponent) j["growth_exponent"] = *growth_exponent;
  if (origin_fit)
    j["origin_log_fit"] = {{"C_fit", origin_fit->c_fit},
                           {"slope_per_step", origin_fit->slope_per_step},
                           {"tol_slope", origin_fit->tol_slope},
                           {"verdict", to_string(origin_fit->verdict)}};
  if (free_boundary) {
    j["free_boundary"] = {{"gamma0", free_boundary->count_gamma0()},
                          {"gamma1", free_boundary->count_gamma1()},
                          {"theta", free_boundary->theta},
                          {"r", free_boundary->radius},
                          {"max_abs_u", free_boundary->max_abs_u}};
  }
  if (assumption_a) {
    const auto& d = assumption_a->dini;
    j["assumption_A"] = {{"dini_divergent", d.divergent},
                         {"dini_integral", d.divergent ? nlohmann::json("divergent") : nlohmann::json(d.integral)},
                         {"dini_ratio", d.ratio},
                         {"potential_sup", assumption_a->potential_sup}};
  }
  if (assumption_b) j["assumption_B_margin"] = *assumption_b;
  nlohmann::json g = nlohmann::json::array();
  for (const auto& rec : growth)
    g.push_back({{"r", rec.radius}, {"ratio_log", rec.ratio_log}, {"ratio_pure", rec.ratio_pure}});
  j["quadratic_growth"] = g;
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& s : sweeps) sw.push_back(s.to_json());
  j["sweeps"] = sw;
  return j;
}

}  // namespace semilinear
