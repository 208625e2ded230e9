#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include "semilinear/elliptic_solver.hpp"

namespace semilinear {

namespace {

// Fraction of the cell [x-h/2, x+h/2] x [y-h/2, y+h/2] inside the unit disk.
double cell_fraction(double x, double y, double h) {
  const double ax = std::abs(x) + 0.5 * h;
  const double ay = std::abs(y) + 0.5 * h;
  if (ax * ax + ay * ay <= 1.0) return 1.0;
  const double bx = std::max(0.0, std::abs(x) - 0.5 * h);
  const double by = std::max(0.0, std::abs(y) - 0.5 * h);
  if (bx * bx + by * by >= 1.0) return 0.0;
  constexpr int sub = 8;
  int inside = 0;
  for (int b = 0; b < sub; ++b)
    for (int a = 0; a < sub; ++a) {
      const double px = x + h * ((a + 0.5) / sub - 0.5);
      const double py = y + h * ((b + 0.5) / sub - 0.5);
      inside += px * px + py * py <= 1.0;
    }
  return static_cast<double>(inside) / (sub * sub);
}

// Integral of log(x^2 + y^2) / (4 pi) over the axis-aligned cell centred at (cx, cy).
double kernel_cell_integral(double cx, double cy, double h) {
  const double a = cx - 0.5 * h;
  const double b = cx + 0.5 * h;
  const double c = cy - 0.5 * h;
  const double d = cy + 0.5 * h;
  const double v = log_kernel_antiderivative(b, d) - log_kernel_antiderivative(a, d) -
                   log_kernel_antiderivative(b, c) + log_kernel_antiderivative(a, c);
  return v / (4.0 * std::numbers::pi);
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double log_kernel_antiderivative(double x, double y) {
  const double r2 = x * x + y * y;
  if (r2 == 0.0) return 0.0;
  double f = x * y * (std::log(r2) - 3.0);
  if (x != 0.0) f += x * x * std::atan(y / x);
  if (y != 0.0) f += y * y * std::atan(x / y);
  return f;
}

ScalarField newtonian_potential(const ScalarField& density) {
  const int n = density.grid_size();
  const double h = density.spacing();
  const int m = 2 * n;
  const int mc = m / 2 + 1;
  const std::size_t real_size = static_cast<std::size_t>(m) * m;
  const std::size_t complex_size = static_cast<std::size_t>(m) * mc;

  double* kern = fftw_alloc_real(real_size);
  double* dens = fftw_alloc_real(real_size);
  fftw_complex* kern_hat = fftw_alloc_complex(complex_size);
  fftw_complex* dens_hat = fftw_alloc_complex(complex_size);

  // Row-major (row = j) arrays; offsets wrap circularly, and the 2N padding
  // keeps every pairwise offset in [-(N-1), N-1] free of aliasing.
  for (int jb = 0; jb < m; ++jb)
    for (int ia = 0; ia < m; ++ia) {
      const int di = ia < n ? ia : ia - m;
      const int dj = jb < n ? jb : jb - m;
      kern[static_cast<std::size_t>(jb) * m + ia] =
          (std::abs(di) < n && std::abs(dj) < n) ? kernel_cell_integral(di * h, dj * h, h) : 0.0;
      dens[static_cast<std::size_t>(jb) * m + ia] = 0.0;
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double w = cell_fraction(density.coord(i), density.coord(j), h);
      if (w > 0.0) dens[static_cast<std::size_t>(j) * m + i] = w * density.at(i, j);
    }

  fftw_plan pk;
  fftw_plan pd;
  fftw_plan back;
  {
    std::lock_guard lock(fftw_planner_mutex());
    pk = fftw_plan_dft_r2c_2d(m, m, kern, kern_hat, FFTW_ESTIMATE);
    pd = fftw_plan_dft_r2c_2d(m, m, dens, dens_hat, FFTW_ESTIMATE);
    back = fftw_plan_dft_c2r_2d(m, m, dens_hat, dens, FFTW_ESTIMATE);
  }
  fftw_execute(pk);
  fftw_execute(pd);
  for (std::size_t k = 0; k < complex_size; ++k) {
    const std::complex<double> a(kern_hat[k][0], kern_hat[k][1]);
    const std::complex<double> b(dens_hat[k][0], dens_hat[k][1]);
    const std::complex<double> c = a * b;
    dens_hat[k][0] = c.real();
    dens_hat[k][1] = c.imag();
  }
  fftw_execute(back);

  ScalarField v(n);
  const double scale = 1.0 / static_cast<double>(real_size);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) v.at(i, j) = dens[static_cast<std::size_t>(j) * m + i] * scale;
  v.metadata() = density.metadata();
  v.metadata()["potential"] = "log kernel, exact cell integrals";

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(pk);
    fftw_destroy_plan(pd);
    fftw_destroy_plan(back);
  }
  fftw_free(kern);
  fftw_free(dens);
  fftw_free(kern_hat);
  fftw_free(dens_hat);
  return v;
}

}  // namespace semilinear
