#include "semilinear/elliptic_solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

#include "semilinear/errors.hpp"

namespace semilinear {

namespace {

// Nodes closer to the circle than this fraction of h become Dirichlet nodes.
constexpr double kSnapFraction = 1e-10;
// Relative threshold below which an active-set candidate counts as zero.
constexpr double kChatter = 1e-10;
// Active-set solves above this grid size start from the half-resolution solution.
constexpr int kCoarseStart = 129;

double axis_crossing(double p_along, double p_across) {
  // distance s >= 0 along +axis from p to the unit circle
  return -p_along + std::sqrt(std::max(0.0, 1.0 - p_across * p_across));
}

struct CachedOperator {
  int grid_size = 0;
  double tol = 0.0;
  int max_refinement = 0;
  std::shared_ptr<DiskLaplacian> op;
  std::shared_ptr<LinearSolver> solver;
};

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

// One-entry cache: repeated Dirichlet solves on the same grid reuse the LU factors.
CachedOperator cached_operator(int grid_size, const SolverConfig& config) {
  static CachedOperator cache;
  std::lock_guard lock(cache_mutex());
  if (!cache.op || cache.grid_size != grid_size || cache.tol != config.tol_linear ||
      cache.max_refinement != config.max_refinement) {
    cache.grid_size = grid_size;
    cache.tol = config.tol_linear;
    cache.max_refinement = config.max_refinement;
    cache.op = std::make_shared<DiskLaplacian>(grid_size);
    cache.solver.reset();
    cache.solver = std::make_shared<LinearSolver>(cache.op->matrix(), config.tol_linear, config.max_refinement);
  }
  return cache;
}

Eigen::SparseMatrix<double> pin_rows(const Eigen::SparseMatrix<double>& a, const std::vector<std::int8_t>& phase) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int col = 0; col < a.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
      if (phase[static_cast<std::size_t>(it.row())] != kZero) trip.emplace_back(it.row(), it.col(), it.value());
  for (std::size_t k = 0; k < phase.size(); ++k)
    if (phase[k] == kZero) trip.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
  Eigen::SparseMatrix<double> out(a.rows(), a.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

std::int8_t sign_class(double v) { return v > 0.0 ? kPositive : (v < 0.0 ? kNegative : kZero); }

Solution package(const DiskLaplacian& op, const Eigen::VectorXd& x, const BoundaryFunction& boundary,
                 const std::vector<std::int8_t>& unknown_phase, SolveReport report) {
  Solution sol;
  sol.u = op.to_field(x, boundary);
  sol.laplacian = ScalarField(op.grid_size());
  sol.phase.assign(sol.u.values().size(), kFixed);
  const Eigen::VectorXd mu = op.apply(x, boundary);
  for (int k = 0; k < op.unknowns(); ++k) {
    const auto [i, j] = op.node(k);
    sol.laplacian.at(i, j) = mu[k];
    sol.phase[static_cast<std::size_t>(j) * op.grid_size() + i] = unknown_phase[static_cast<std::size_t>(k)];
  }
  sol.u.metadata()["solver"] = report.kind;
  sol.u.metadata()["initial_guess"] = report.initial_guess;
  sol.u.metadata()["iterations"] = std::to_string(report.iterations);
  sol.report = std::move(report);
  return sol;
}

// Active-set iteration shared by the two-phase and no-sign problems. Phase sets
// are frozen per step; zero-phase rows are pinned to u = 0.
Solution active_set_solve(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size,
                          const SolverConfig& config, bool no_sign) {
  config.validate();
  // nested iteration: the converged half-resolution solution seeds the phases
  std::optional<Solution> coarse;
  if (!config.initial_guess && grid_size > kCoarseStart)
    coarse = active_set_solve(rhs, boundary, (grid_size + 1) / 2, config, no_sign);
  const auto base = cached_operator(grid_size, config);
  const DiskLaplacian& op = *base.op;
  const int m = op.unknowns();
  const double h = op.spacing();
  const double zero_band = 10.0 * h * h;
  const Eigen::VectorXd bc = op.boundary_contribution(boundary);

  SolveReport report;
  report.kind = no_sign ? (config.nonnegative_branch ? "no_sign_nonnegative" : "no_sign") : "two_phase";
  report.zero_band = no_sign ? zero_band : 0.0;

  Eigen::VectorXd t;
  if (config.initial_guess) {
    t = op.restrict(*config.initial_guess);
    report.initial_guess = "supplied";
  } else if (coarse) {
    const ScalarField& cu = coarse->u;
    t = op.restrict(ScalarField::from_function(grid_size, [&](double a, double b) { return cu.interpolate(a, b); }));
    report.initial_guess = coarse->report.initial_guess + "+coarse_grid";
  } else {
    std::lock_guard lock(cache_mutex());
    t = base.solver->solve(-bc);
    report.initial_guess = "harmonic_extension";
  }
  std::vector<std::int8_t> phase(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double v = t[k];
    const bool zero = no_sign && (std::abs(v) <= zero_band || (config.nonnegative_branch && v < 0.0));
    phase[static_cast<std::size_t>(k)] = zero ? static_cast<std::int8_t>(kZero) : sign_class(v);
  }

  std::vector<double> x1(static_cast<std::size_t>(m));
  std::vector<double> x2(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const auto [i, j] = op.node(k);
    x1[static_cast<std::size_t>(k)] = -1.0 + h * i;
    x2[static_cast<std::size_t>(k)] = -1.0 + h * j;
  }

  std::unique_ptr<LinearSolver> pinned;
  bool refactor = true;
  Eigen::VectorXd w_prev = t;
  Eigen::VectorXd b(m);
  for (int it = 1; it <= config.max_picard; ++it) {
    if (refactor) {
      pinned.reset();
      pinned = std::make_unique<LinearSolver>(pin_rows(op.matrix(), phase), config.tol_linear, config.max_refinement);
      refactor = false;
    }
    for (int k = 0; k < m; ++k) {
      const auto s = static_cast<std::size_t>(k);
      switch (phase[s]) {
        case kPositive: b[k] = (no_sign ? rhs.g : rhs.g1)(x1[s], x2[s], t[k]) - bc[k]; break;
        case kNegative: b[k] = (no_sign ? rhs.g : rhs.g2)(x1[s], x2[s], t[k]) - bc[k]; break;
        default: b[k] = 0.0;
      }
    }
    const Eigen::VectorXd w = pinned->solve(b);
    report.linear_residual = pinned->last_residual();
    const Eigen::VectorXd mu = op.apply(w, boundary);
    // candidates within rounding of zero keep the zero phase; without this,
    // regions where u vanishes identically chatter between phases
    const double chatter = kChatter * std::max(1.0, w.lpNorm<Eigen::Infinity>());

    int flips = 0;
    for (int k = 0; k < m; ++k) {
      const auto s = static_cast<std::size_t>(k);
      const double d = op.diagonal(k);
      std::int8_t next = phase[s];
      if (no_sign) {
        if (phase[s] == kPositive && w[k] <= 0.0) next = kZero;
        else if (phase[s] == kNegative && w[k] >= 0.0) next = kZero;
        else if (phase[s] == kZero) {
          // a zero node is consistent while mu lies between 0 and g (a
          // coincidence fraction in [0, 1]); outside it follows the candidate
          const double gz = rhs.g(x1[s], x2[s], t[k]);
          const double band = chatter * d;
          if (mu[k] > std::max(0.0, gz) + band || (!config.nonnegative_branch && mu[k] < std::min(0.0, gz) - band))
            next = sign_class(w[k] + (mu[k] - gz) / d);
          if (config.nonnegative_branch && next == kNegative) next = kZero;
        }
      } else {
        // value the node would take if relaxed alone with the given phase source
        const double cand_pos = w[k] + (mu[k] - rhs.g1(x1[s], x2[s], t[k])) / d;
        const double cand_neg = w[k] + (mu[k] - rhs.g2(x1[s], x2[s], t[k])) / d;
        const bool pos = cand_pos > chatter;
        const bool neg = cand_neg < -chatter;
        if (pos && neg) {
          if (phase[s] == kZero) next = std::abs(cand_pos) >= std::abs(cand_neg) ? kPositive : kNegative;
        } else if (pos) {
          next = kPositive;
        } else if (neg) {
          next = kNegative;
        } else {
          next = kZero;
        }
        // a node changes sign only through the zero phase
        if (next == -phase[s] && next != kZero) next = kZero;
      }
      if (next != phase[s]) {
        phase[s] = next;
        ++flips;
      }
    }
    const double diff = (w - w_prev).lpNorm<Eigen::Infinity>();
    report.residual_trace.push_back(diff);
    report.sign_flips.push_back(flips);
    report.iterations = it;
    if (flips == 0 && diff < config.tol_picard) {
      report.converged = true;
      return package(op, w, boundary, phase, std::move(report));
    }
    refactor = flips > 0;
    w_prev = w;
    t = (1.0 - config.damping) * t + config.damping * w;
  }
  throw NonConvergenceError(report.kind + " active-set iteration exceeded max_picard=" +
                                std::to_string(config.max_picard),
                            report.residual_trace, report.sign_flips);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol_linear > 0.0) || !(tol_picard > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (!(damping > 0.0) || damping > 1.0) throw ConfigError("damping must lie in (0, 1]");
  if (max_picard < 1 || max_refinement < 1) throw ConfigError("iteration caps must be positive");
}

std::string to_string(RhsKind kind) {
  switch (kind) {
    case RhsKind::continuous: return "continuous";
    case RhsKind::two_phase: return "two_phase";
    case RhsKind::no_sign: return "no_sign";
  }
  return "unknown";
}

RhsSpec RhsSpec::continuous(RhsFunction f) {
  RhsSpec s;
  s.kind = RhsKind::continuous;
  s.f = std::move(f);
  return s;
}

RhsSpec RhsSpec::two_phase(RhsFunction g1, RhsFunction g2) {
  RhsSpec s;
  s.kind = RhsKind::two_phase;
  s.g1 = std::move(g1);
  s.g2 = std::move(g2);
  return s;
}

RhsSpec RhsSpec::no_sign(RhsFunction g) {
  RhsSpec s;
  s.kind = RhsKind::no_sign;
  s.g = std::move(g);
  return s;
}

double RhsSpec::operator()(double x1, double x2, double t) const {
  switch (kind) {
    case RhsKind::continuous: return f(x1, x2, t);
    case RhsKind::two_phase: return t > 0.0 ? g1(x1, x2, t) : (t < 0.0 ? g2(x1, x2, t) : 0.0);
    case RhsKind::no_sign: return t != 0.0 ? g(x1, x2, t) : 0.0;
  }
  return 0.0;
}

nlohmann::json SolveReport::to_json() const {
  return {{"kind", kind},
          {"iterations", iterations},
          {"converged", converged},
          {"residuals", residual_trace},
          {"sign_flips", sign_flips},
          {"linear_residual", linear_residual},
          {"initial_guess", initial_guess},
          {"zero_band", zero_band},
          {"secant_from", secant_from}};
}

DiskLaplacian::DiskLaplacian(int grid_size) : n_(grid_size), h_(2.0 / (grid_size - 1)) {
  if (grid_size < 5 || grid_size % 2 == 0) throw InvalidDimensionError("grid size must be odd and >= 5");
  index_.assign(static_cast<std::size_t>(n_) * n_, -1);
  auto coord = [&](int i) { return -1.0 + h_ * i; };
  auto open_disk = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) return false;
    const double x = coord(i);
    const double y = coord(j);
    return x * x + y * y < 1.0;
  };
  // arm length fraction towards (di, dj); 1 for a regular neighbour
  auto theta = [&](int i, int j, int di, int dj) {
    if (open_disk(i + di, j + dj)) return 1.0;
    const double px = coord(i);
    const double py = coord(j);
    const double s = di != 0 ? axis_crossing(di * px, py) : axis_crossing(dj * py, px);
    return std::min(1.0, s / h_);
  };

  constexpr int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      if (!open_disk(i, j)) continue;
      bool snapped = false;
      for (const auto& d : dirs) snapped = snapped || theta(i, j, d[0], d[1]) < kSnapFraction;
      if (snapped) continue;
      index_[static_cast<std::size_t>(j) * n_ + i] = static_cast<int>(nodes_.size());
      nodes_.emplace_back(i, j);
    }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nodes_.size() * 5);
  diag_.resize(nodes_.size());
  const double h2 = h_ * h_;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto [i, j] = nodes_[k];
    double center = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
      const int dx = axis == 0 ? 1 : 0;
      const int dy = axis == 0 ? 0 : 1;
      double th[2];
      for (int side = 0; side < 2; ++side) {
        const int sgn = side == 0 ? 1 : -1;
        const int ni = i + sgn * dx;
        const int nj = j + sgn * dy;
        const bool regular = ni >= 0 && nj >= 0 && ni < n_ && nj < n_ && index(ni, nj) >= 0;
        th[side] = regular ? 1.0 : theta(i, j, sgn * dx, sgn * dy);
      }
      for (int side = 0; side < 2; ++side) {
        const int sgn = side == 0 ? 1 : -1;
        const int ni = i + sgn * dx;
        const int nj = j + sgn * dy;
        const double coeff = 2.0 / (h2 * th[side] * (th[0] + th[1]));
        const bool regular = ni >= 0 && nj >= 0 && ni < n_ && nj < n_ && index(ni, nj) >= 0;
        if (regular) {
          trip.emplace_back(static_cast<int>(k), index(ni, nj), coeff);
        } else {
          double bx = coord(i) + sgn * dx * th[side] * h_;
          double by = coord(j) + sgn * dy * th[side] * h_;
          const double r = std::hypot(bx, by);
          bx /= r;  // a snapped neighbour sits within 1e-10 h of the circle
          by /= r;
          arms_.push_back({static_cast<int>(k), coeff, bx, by});
        }
      }
      center -= 2.0 / (h2 * th[0] * th[1]);
    }
    trip.emplace_back(static_cast<int>(k), static_cast<int>(k), center);
    diag_[k] = -center;
  }
  matrix_.resize(static_cast<int>(nodes_.size()), static_cast<int>(nodes_.size()));
  matrix_.setFromTriplets(trip.begin(), trip.end());
  matrix_.makeCompressed();
}

Eigen::VectorXd DiskLaplacian::boundary_contribution(const BoundaryFunction& g) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(unknowns());
  for (const auto& arm : arms_) out[arm.row] += arm.coeff * g(arm.bx, arm.by);
  return out;
}

Eigen::VectorXd DiskLaplacian::apply(const Eigen::VectorXd& x, const BoundaryFunction& g) const {
  return matrix_ * x + boundary_contribution(g);
}

Eigen::VectorXd DiskLaplacian::restrict(const ScalarField& field) const {
  if (field.grid_size() != n_) throw InvalidDimensionError("field grid does not match operator grid");
  Eigen::VectorXd x(unknowns());
  for (int k = 0; k < unknowns(); ++k) x[k] = field.at(nodes_[static_cast<std::size_t>(k)].first, nodes_[static_cast<std::size_t>(k)].second);
  return x;
}

ScalarField DiskLaplacian::to_field(const Eigen::VectorXd& x, const BoundaryFunction& g) const {
  ScalarField f(n_);
  std::vector<std::pair<int, int>> exterior;
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const int k = index(i, j);
      if (k >= 0) {
        f.at(i, j) = x[k];
        continue;
      }
      const double px = f.coord(i);
      const double py = f.coord(j);
      const double r = std::hypot(px, py);
      if (r <= 1.0 + 1e-14) f.at(i, j) = g(px / r, py / r);
      else exterior.emplace_back(i, j);
    }
  // Radial quadratic through the circle value and two interior samples; the
  // interior samples' stencils stay inside radius 1 - h/6.
  const double r1 = 1.0 - 3.0 * h_;
  const double r2 = 1.0 - 6.0 * h_;
  for (const auto& [i, j] : exterior) {
    const double px = f.coord(i);
    const double py = f.coord(j);
    const double r = std::hypot(px, py);
    const double ex = px / r;
    const double ey = py / r;
    const double v0 = g(ex, ey);
    const double v1 = f.interpolate(r1 * ex, r1 * ey);
    const double v2 = f.interpolate(r2 * ex, r2 * ey);
    const double l0 = (r - r1) * (r - r2) / ((1.0 - r1) * (1.0 - r2));
    const double l1 = (r - 1.0) * (r - r2) / ((r1 - 1.0) * (r1 - r2));
    const double l2 = (r - 1.0) * (r - r1) / ((r2 - 1.0) * (r2 - r1));
    f.at(i, j) = l0 * v0 + l1 * v1 + l2 * v2;
  }
  return f;
}

struct LinearSolver::Impl {
  Eigen::SparseMatrix<double> a;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

LinearSolver::LinearSolver(const Eigen::SparseMatrix<double>& a, double tol, int max_refinement)
    : impl_(new Impl), tol_(tol), max_refinement_(max_refinement) {
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->lu.analyzePattern(impl_->a);
  impl_->lu.factorize(impl_->a);
  if (impl_->lu.info() != Eigen::Success) {
    delete impl_;
    impl_ = nullptr;
    throw SolverStallError("sparse LU factorization failed", std::numeric_limits<double>::infinity());
  }
}

LinearSolver::~LinearSolver() { delete impl_; }

void LinearSolver::refactor(const Eigen::SparseMatrix<double>& a) {
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->lu.factorize(impl_->a);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverStallError("sparse LU factorization failed", std::numeric_limits<double>::infinity());
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b) {
  const double bnorm = b.lpNorm<Eigen::Infinity>();
  if (bnorm == 0.0) {
    last_residual_ = 0.0;
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd x = impl_->lu.solve(b);
  for (int it = 0; it <= max_refinement_; ++it) {
    const Eigen::VectorXd r = b - impl_->a * x;
    last_residual_ = r.lpNorm<Eigen::Infinity>() / bnorm;
    if (last_residual_ <= tol_) return x;
    if (it < max_refinement_) x += impl_->lu.solve(r);
  }
  throw SolverStallError("linear solve stalled above tol_linear after refinement cap", last_residual_);
}

ScalarField solve_dirichlet(const ScalarField& rhs_field, const BoundaryFunction& boundary, const SolverConfig& config) {
  config.validate();
  const auto base = cached_operator(rhs_field.grid_size(), config);
  const Eigen::VectorXd b = base.op->restrict(rhs_field) - base.op->boundary_contribution(boundary);
  Eigen::VectorXd x;
  {
    std::lock_guard lock(cache_mutex());
    x = base.solver->solve(b);
  }
  ScalarField u = base.op->to_field(x, boundary);
  u.metadata()["solver"] = "dirichlet";
  return u;
}

Solution solve_semilinear(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size,
                          const SolverConfig& config) {
  config.validate();
  if (!rhs.f) throw ConfigError("continuous right-hand side needs f");
  const auto base = cached_operator(grid_size, config);
  const DiskLaplacian& op = *base.op;
  const int m = op.unknowns();
  const Eigen::VectorXd bc = op.boundary_contribution(boundary);

  SolveReport report;
  report.kind = "semilinear";
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  if (config.initial_guess) {
    u = op.restrict(*config.initial_guess);
    report.initial_guess = "supplied";
  }
  std::vector<Eigen::Vector2d> xs(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const auto [i, j] = op.node(k);
    xs[static_cast<std::size_t>(k)] = {-1.0 + op.spacing() * i, -1.0 + op.spacing() * j};
  }
  // Picard on the cached Laplacian while it contracts. When the step has not
  // halved over the last kStallWindow iterations, switch to the secant form
  // (Delta - c) w = f(u) - c u with c = max(0, (f(u) - f(0)) / u), whose fixed
  // points are the same; it tolerates sources that are steep in t. c is capped
  // at 1e4 / h^2 so that the shifted matrix stays well conditioned. Every
  // secant step refactorizes with the column ordering of the first one.
  constexpr int kStallWindow = 10;
  const double shift_cap = 1e4 / (op.spacing() * op.spacing());
  bool secant = false;
  Eigen::VectorXd b(m);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(m);
  std::unique_ptr<LinearSolver> shifted;
  for (int it = 1; it <= config.max_picard; ++it) {
    const auto& tr = report.residual_trace;
    if (!secant && tr.size() >= 2 * kStallWindow && tr.back() > 0.5 * tr[tr.size() - 1 - kStallWindow]) {
      secant = true;
      report.secant_from = it;
    }
    for (int k = 0; k < m; ++k) {
      const Eigen::Vector2d& x = xs[static_cast<std::size_t>(k)];
      const double fu = rhs.f(x.x(), x.y(), u[k]);
      if (secant)
        shift[k] = u[k] != 0.0 ? std::clamp((fu - rhs.f(x.x(), x.y(), 0.0)) / u[k], 0.0, shift_cap) : 0.0;
      b[k] = fu - shift[k] * u[k] - bc[k];
    }
    Eigen::VectorXd w;
    if (secant) {
      Eigen::SparseMatrix<double> a = op.matrix();
      for (int k = 0; k < m; ++k) a.coeffRef(k, k) -= shift[k];
      if (shifted)
        shifted->refactor(a);
      else
        shifted = std::make_unique<LinearSolver>(a, config.tol_linear, config.max_refinement);
      w = shifted->solve(b);
      report.linear_residual = shifted->last_residual();
    } else {
      std::lock_guard lock(cache_mutex());
      w = base.solver->solve(b);
      report.linear_residual = base.solver->last_residual();
    }
    const Eigen::VectorXd next = secant ? w : (1.0 - config.damping) * u + config.damping * w;
    int flips = 0;
    for (int k = 0; k < m; ++k) flips += sign_class(next[k]) != sign_class(u[k]);
    const double diff = (next - u).lpNorm<Eigen::Infinity>();
    report.residual_trace.push_back(diff);
    report.sign_flips.push_back(flips);
    report.iterations = it;
    u = next;
    if (diff < config.tol_picard) {
      report.converged = true;
      std::vector<std::int8_t> phase(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) phase[static_cast<std::size_t>(k)] = sign_class(u[k]);
      return package(op, u, boundary, phase, std::move(report));
    }
  }
  throw NonConvergenceError("Picard iteration exceeded max_picard=" + std::to_string(config.max_picard),
                            report.residual_trace, report.sign_flips);
}

Solution solve_two_phase(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size,
                         const SolverConfig& config) {
  if (!rhs.g1 || !rhs.g2) throw ConfigError("two-phase right-hand side needs g1 and g2");
  return active_set_solve(rhs, boundary, grid_size, config, false);
}

Solution solve_no_sign(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size,
                       const SolverConfig& config) {
  if (!rhs.g) throw ConfigError("no-sign right-hand side needs g");
  return active_set_solve(rhs, boundary, grid_size, config, true);
}

Solution solve(const RhsSpec& rhs, const BoundaryFunction& boundary, int grid_size, const SolverConfig& config) {
  switch (rhs.kind) {
    case RhsKind::continuous: return solve_semilinear(rhs, boundary, grid_size, config);
    case RhsKind::two_phase: return solve_two_phase(rhs, boundary, grid_size, config);
    case RhsKind::no_sign: return solve_no_sign(rhs, boundary, grid_size, config);
  }
  throw ConfigError("unknown right-hand side kind");
}

double pde_residual(const ScalarField& u, const RhsFunction& rhs, double margin, bool exclude_free_boundary,
                    const std::function<bool(double, double)>& skip) {
  const ScalarField lap = fd_laplacian(u);
  const int n = u.grid_size();
  double worst = 0.0;
  for (int j = 2; j < n - 2; ++j)
    for (int i = 2; i < n - 2; ++i) {
      const double x1 = u.coord(i);
      const double x2 = u.coord(j);
      if (std::hypot(x1, x2) > 1.0 - margin) continue;
      if (skip && skip(x1, x2)) continue;
      if (exclude_free_boundary) {
        const std::int8_t c = sign_class(u.at(i, j));
        bool mixed = false;
        for (int b = -2; b <= 2 && !mixed; ++b)
          for (int a = -2; a <= 2 && !mixed; ++a) mixed = sign_class(u.at(i + a, j + b)) != c;
        if (mixed) continue;
      }
      worst = std::max(worst, std::abs(lap.at(i, j) - rhs(x1, x2, u.at(i, j))));
    }
  return worst;
}

}  // namespace semilinear
