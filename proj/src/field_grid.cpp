#include "semilinear/field_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "semilinear/errors.hpp"

namespace semilinear {

namespace {

constexpr double kMaskSlack = 1e-14;
constexpr double kNodeSnap = 1e-9;

struct Stencil1d {
  int first = 0;               // leftmost stencil node
  std::array<double, 4> w{};   // weights on first..first+3
};

// Lagrange weights for equispaced nodes 0..3 at local coordinate t.
std::array<double, 4> lagrange_weights(double t) {
  return {-(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0, t * (t - 2.0) * (t - 3.0) / 2.0,
          -t * (t - 1.0) * (t - 3.0) / 2.0, t * (t - 1.0) * (t - 2.0) / 6.0};
}

std::array<double, 4> lagrange_derivative(double t) {
  return {-(3.0 * t * t - 12.0 * t + 11.0) / 6.0, (3.0 * t * t - 10.0 * t + 6.0) / 2.0,
          -(3.0 * t * t - 8.0 * t + 3.0) / 2.0, (3.0 * t * t - 6.0 * t + 2.0) / 6.0};
}

Stencil1d value_stencil(double x, int n, double h) {
  const double s = (x + 1.0) / h;
  Stencil1d st;
  const double nearest = std::round(s);
  if (std::abs(s - nearest) < kNodeSnap) {
    const int k = static_cast<int>(nearest);
    st.first = std::clamp(k - 1, 0, n - 4);
    st.w[static_cast<std::size_t>(k - st.first)] = 1.0;
    return st;
  }
  st.first = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, n - 4);
  st.w = lagrange_weights(s - st.first);
  return st;
}

Stencil1d derivative_stencil(double x, int n, double h) {
  const double s = (x + 1.0) / h;
  Stencil1d st;
  st.first = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, n - 4);
  st.w = lagrange_derivative(s - st.first);
  for (double& w : st.w) w /= h;
  return st;
}

double tensor_apply(const ScalarField& f, const Stencil1d& sx, const Stencil1d& sy) {
  double total = 0.0;
  for (int b = 0; b < 4; ++b) {
    if (sy.w[b] == 0.0) continue;
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += sx.w[a] * f.at(sx.first + a, sy.first + b);
    total += sy.w[b] * row;
  }
  return total;
}

// Finite-difference weights along one axis at a node: offsets and weights for
// the first and second derivative.
struct AxisStencil {
  std::vector<std::pair<int, double>> d1;
  std::vector<std::pair<int, double>> d2;
};

AxisStencil axis_stencil(const ScalarField& f, int i, int j, bool along_x) {
  const int n = f.grid_size();
  const double h = f.spacing();
  const int idx = along_x ? i : j;
  auto masked = [&](int off) {
    const int k = idx + off;
    if (k < 0 || k >= n) return false;
    return along_x ? f.in_mask(k, j) : f.in_mask(i, k);
  };
  auto exists = [&](int off) { return idx + off >= 0 && idx + off < n; };

  const bool self_masked = f.in_mask(i, j);
  bool centered = exists(-1) && exists(1);
  if (centered && self_masked) centered = masked(-1) && masked(1);
  AxisStencil st;
  if (centered) {
    st.d1 = {{-1, -0.5 / h}, {1, 0.5 / h}};
    st.d2 = {{-1, 1.0 / (h * h)}, {0, -2.0 / (h * h)}, {1, 1.0 / (h * h)}};
    return st;
  }
  // one-sided toward the side that stays inside (the mask for masked nodes,
  // the array otherwise)
  const bool forward = self_masked ? (masked(1) && exists(3)) : exists(3);
  const int sgn = forward ? 1 : -1;
  st.d1 = {{0, -1.5 * sgn / h}, {sgn, 2.0 * sgn / h}, {2 * sgn, -0.5 * sgn / h}};
  st.d2 = {{0, 2.0 / (h * h)}, {sgn, -5.0 / (h * h)}, {2 * sgn, 4.0 / (h * h)}, {3 * sgn, -1.0 / (h * h)}};
  return st;
}

nlohmann::json header_json(const ScalarField& field) {
  return {{"N", field.grid_size()},
          {"mask_rule", "x1^2 + x2^2 <= 1"},
          {"spacing", field.spacing()},
          {"metadata", field.metadata()}};
}

ScalarField field_from_header(const std::string& line) {
  const auto header = nlohmann::json::parse(line);
  ScalarField field(header.at("N").get<int>());
  if (header.contains("metadata"))
    field.metadata() = header.at("metadata").get<std::map<std::string, std::string>>();
  return field;
}

}  // namespace

ScalarField::ScalarField(int grid_size) : n_(grid_size) {
  if (grid_size < 5 || grid_size % 2 == 0)
    throw InvalidDimensionError("grid size must be odd and >= 5, got " + std::to_string(grid_size));
  h_ = 2.0 / (grid_size - 1);
  values_.assign(static_cast<std::size_t>(grid_size) * grid_size, 0.0);
}

ScalarField ScalarField::from_function(int grid_size, const PointFunction& fn) {
  ScalarField f(grid_size);
  for (int j = 0; j < grid_size; ++j)
    for (int i = 0; i < grid_size; ++i) f.at(i, j) = fn(f.coord(i), f.coord(j));
  return f;
}

bool ScalarField::in_mask(int i, int j) const {
  const double x = coord(i);
  const double y = coord(j);
  return x * x + y * y <= 1.0 + kMaskSlack;
}

double ScalarField::interpolate(double x1, double x2) const {
  return tensor_apply(*this, value_stencil(x1, n_, h_), value_stencil(x2, n_, h_));
}

Eigen::Vector2d ScalarField::interpolate_gradient(double x1, double x2) const {
  const auto vx = value_stencil(x1, n_, h_);
  const auto vy = value_stencil(x2, n_, h_);
  const auto dx = derivative_stencil(x1, n_, h_);
  const auto dy = derivative_stencil(x2, n_, h_);
  return {tensor_apply(*this, dx, vy), tensor_apply(*this, vx, dy)};
}

double ScalarField::sup_norm() const {
  double m = 0.0;
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      if (in_mask(i, j)) m = std::max(m, std::abs(at(i, j)));
  return m;
}

double sample(const ScalarField& field, double x1, double x2) {
  if (x1 * x1 + x2 * x2 > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "sample point (" << x1 << ", " << x2 << ") lies outside the unit disk";
    throw OutOfDomainError(msg.str());
  }
  return field.interpolate(x1, x2);
}

std::vector<double> sample(const ScalarField& field, const std::vector<Eigen::Vector2d>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(sample(field, p.x(), p.y()));
  return out;
}

Rescaling make_rescaling(const ScalarField& field, const Eigen::Vector2d& y, double r) {
  Rescaling resc;
  resc.base_point = y;
  resc.radius = r;
  resc.value_at_y = sample(field, y.x(), y.y());
  resc.gradient_at_y = field.interpolate_gradient(y.x(), y.y());
  return resc;
}

ScalarField rescale(const ScalarField& field, const Rescaling& resc, int out_size) {
  const double r = resc.radius;
  const Eigen::Vector2d& y = resc.base_point;
  if (!(r > 0.0) || r > 1.0 - y.norm() + 1e-12)
    throw OutOfDomainError("rescaling radius must lie in (0, 1 - |y|]");
  ScalarField out(out_size);
  const double inv_r2 = 1.0 / (r * r);
  for (int j = 0; j < out_size; ++j)
    for (int i = 0; i < out_size; ++i) {
      const double x1 = out.coord(i);
      const double x2 = out.coord(j);
      // |r x_k + y_k| <= r + |y| <= 1, so every node maps into the stored square
      const double u = field.interpolate(r * x1 + y.x(), r * x2 + y.y());
      const double tangent = r * (x1 * resc.gradient_at_y.x() + x2 * resc.gradient_at_y.y()) + resc.value_at_y;
      out.at(i, j) = (u - tangent) * inv_r2;
    }
  out.metadata() = field.metadata();
  std::ostringstream tag;
  tag.precision(17);
  tag << "y=(" << y.x() << "," << y.y() << ") r=" << r;
  out.metadata()["rescaling"] = tag.str();
  return out;
}

std::pair<ScalarField, ScalarField> fd_gradient(const ScalarField& field) {
  const int n = field.grid_size();
  ScalarField gx(n);
  ScalarField gy(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const auto sx = axis_stencil(field, i, j, true);
      const auto sy = axis_stencil(field, i, j, false);
      double a = 0.0;
      double b = 0.0;
      for (const auto& [o, w] : sx.d1) a += w * field.at(i + o, j);
      for (const auto& [o, w] : sy.d1) b += w * field.at(i, j + o);
      gx.at(i, j) = a;
      gy.at(i, j) = b;
    }
  return {std::move(gx), std::move(gy)};
}

std::pair<ScalarField, ScalarField> fd_gradient_limited(const ScalarField& field) {
  auto [gx, gy] = fd_gradient(field);
  const int n = field.grid_size();
  const double h = field.spacing();
  auto usable = [&](int i, int j) { return i >= 0 && j >= 0 && i < n && j < n && field.in_mask(i, j); };
  auto limited = [&](int i, int j, int di, int dj, double fallback) {
    for (int k = -2; k <= 2; ++k)
      if (!usable(i + k * di, j + k * dj)) return fallback;
    auto u = [&](int k) { return field.at(i + k * di, j + k * dj); };
    const double c = (u(1) - u(-1)) / (2.0 * h);
    const double f = (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h);
    const double b = (3.0 * u(0) - 4.0 * u(-1) + u(-2)) / (2.0 * h);
    return std::max(std::min(c, f), std::min(std::max(c, f), b));
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!field.in_mask(i, j)) continue;
      gx.at(i, j) = limited(i, j, 1, 0, gx.at(i, j));
      gy.at(i, j) = limited(i, j, 0, 1, gy.at(i, j));
    }
  return {std::move(gx), std::move(gy)};
}

std::array<ScalarField, 4> fd_hessian(const ScalarField& field) {
  const int n = field.grid_size();
  std::array<ScalarField, 4> out{ScalarField(n), ScalarField(n), ScalarField(n), ScalarField(n)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const auto sx = axis_stencil(field, i, j, true);
      const auto sy = axis_stencil(field, i, j, false);
      double xx = 0.0;
      double yy = 0.0;
      double xy = 0.0;
      for (const auto& [o, w] : sx.d2) xx += w * field.at(i + o, j);
      for (const auto& [o, w] : sy.d2) yy += w * field.at(i, j + o);
      for (const auto& [ox, wx] : sx.d1)
        for (const auto& [oy, wy] : sy.d1) xy += wx * wy * field.at(i + ox, j + oy);
      out[0].at(i, j) = xx;
      out[1].at(i, j) = xy;
      out[2].at(i, j) = xy;
      out[3].at(i, j) = yy;
    }
  return out;
}

ScalarField fd_laplacian(const ScalarField& field) {
  auto hess = fd_hessian(field);
  ScalarField lap(field.grid_size());
  for (std::size_t k = 0; k < lap.values().size(); ++k) lap.values()[k] = hess[0].values()[k] + hess[3].values()[k];
  return lap;
}

void write_field_csv(const ScalarField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "# " << header_json(field).dump() << "\n";
  out << "i,j,x1,x2,value\n";
  char buf[160];
  const int n = field.grid_size();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", i, j, field.coord(i), field.coord(j), field.at(i, j));
      out << buf;
    }
}

ScalarField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("# ", 0) != 0) throw Error(path + ": missing JSON header line");
  ScalarField field = field_from_header(line.substr(2));
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int i = 0;
    int j = 0;
    double x1 = 0.0;
    double x2 = 0.0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &i, &j, &x1, &x2, &v) != 5)
      throw Error(path + ": malformed row '" + line + "'");
    field.at(i, j) = v;
  }
  return field;
}

void write_field_binary(const ScalarField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << header_json(field).dump() << "\n";
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

ScalarField read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  ScalarField field = field_from_header(line);
  in.read(reinterpret_cast<char*>(field.values().data()),
          static_cast<std::streamsize>(field.values().size() * sizeof(double)));
  if (!in) throw Error(path + ": truncated binary field");
  return field;
}

}  // namespace semilinear
