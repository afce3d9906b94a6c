#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/mixture.hpp"

namespace stlmc {

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

struct QuadratureOptions {
  double abs_tol = 1e-11;
  std::size_t panels = 64;  // pre-split so narrow peaks are never skipped
  int max_depth = 40;
};

/// Adaptive Simpson over [a, b] after splitting into equal panels.
template <class F>
double integrate_1d(const F& f, double a, double b, const QuadratureOptions& options = {}) {
  if (b <= a) return 0.0;
  const std::size_t panels = std::max<std::size_t>(1, options.panels);
  const double width = (b - a) / static_cast<double>(panels);
  const double tol = options.abs_tol / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + static_cast<double>(p) * width;
    const double hi = (p + 1 == panels) ? b : lo + width;
    const double flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_recurse(f, lo, hi, flo, fmid, fhi, whole, tol, options.max_depth);
  }
  return total;
}

/// Iterated adaptive Simpson over the rectangle [lo0, hi0] x [lo1, hi1].
template <class F>
double integrate_2d(const F& f, double lo0, double hi0, double lo1, double hi1, const QuadratureOptions& options = {}) {
  QuadratureOptions inner = options;
  inner.abs_tol = options.abs_tol / std::max(1.0, hi0 - lo0);
  QuadratureOptions outer = options;
  return integrate_1d(
      [&](double x0) {
        return integrate_1d([&](double x1) { return f(std::array<double, 2>{x0, x1}); }, lo1, hi1, inner);
      },
      lo0, hi0, outer);
}

/// Half-width of the box used for Z_beta: D + 8 sigma / sqrt(beta).
inline double quadrature_half_width(const GaussianMixture& mixture, double beta) {
  return mixture.radius() + 8.0 * std::sqrt(mixture.sigma2() / beta);
}

/// Integral of e^{-beta f} over a box, for d <= 2.
template <Target T>
double integrate_boltzmann(const T& target, double beta, std::span<const double> lo, std::span<const double> hi,
                           const QuadratureOptions& options = {}) {
  const std::size_t d = target.dim();
  detail::require(d <= 2, ErrorCode::unsupported_dimension, "quadrature is available for d <= 2 only");
  if (d == 1) {
    return integrate_1d(
        [&](double x) {
          const double p[1] = {x};
          return std::exp(-beta * target.value(std::span<const double>(p, 1)));
        },
        lo[0], hi[0], options);
  }
  return integrate_2d(
      [&](const std::array<double, 2>& x) { return std::exp(-beta * target.value(std::span<const double>(x))); },
      lo[0], hi[0], lo[1], hi[1], options);
}

/// log Z_beta = log of the integral of e^{-beta f} over R^d (d <= 2), with the
/// domain truncated to [-(D + 8 sigma/sqrt(beta)), D + 8 sigma/sqrt(beta)]^d.
template <Target T>
double log_partition_function(const T& target, double beta, const QuadratureOptions& options = {}) {
  detail::require(beta > 0.0, ErrorCode::invalid_argument, "beta must be positive");
  const double h = quadrature_half_width(target.mixture(), beta);
  const std::vector<double> lo(target.dim(), -h), hi(target.dim(), h);
  return std::log(integrate_boltzmann(target, beta, lo, hi, options));
}

}  // namespace stlmc
