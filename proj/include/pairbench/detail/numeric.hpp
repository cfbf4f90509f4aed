#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "pairbench/errors.hpp"

namespace pairbench::detail {

inline bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

/// Trapezoidal quadrature weights for an arbitrary strictly increasing grid.
inline std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  const std::size_t n = grid.size();
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (grid[i + 1] - grid[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

inline double integrate(const std::vector<double>& values,
                        const std::vector<double>& grid) {
  const std::vector<double> w = trapezoid_weights(grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += w[i] * values[i];
  return acc;
}

/// Checks |grid[i+1]-grid[i]| constant to a relative tolerance; returns the
/// common step. Single-point grids are rejected.
inline double uniform_step(const std::vector<double>& grid, double rel_tol = 1e-9) {
  if (grid.size() < 2) throw DomainError("uniform grid needs at least 2 points");
  const double step = grid[1] - grid[0];
  if (!(step > 0.0)) throw DomainError("grid is not strictly increasing");
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double s = grid[i + 1] - grid[i];
    if (std::abs(s - step) > rel_tol * std::abs(step))
      throw DomainError("grid is not uniform");
  }
  return step;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 DFT, convention X_j = sum_k x_k exp(-2*pi*i*j*k/N).
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// DFT with the same convention as fft_radix2, for any length. Radix-2 sizes
/// take the fast path; other sizes fall back to the direct transform.
inline std::vector<std::complex<double>> dft(std::vector<std::complex<double>> x) {
  const std::size_t n = x.size();
  if (is_power_of_two(n)) {
    fft_radix2(x);
    return x;
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double ang =
          -2.0 * std::numbers::pi * static_cast<double>(j) * static_cast<double>(k) /
          static_cast<double>(n);
      acc += x[k] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[j] = acc;
  }
  return out;
}

}  // namespace pairbench::detail
