#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/langevin.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/quadrature.hpp"
#include "stlmc/rng.hpp"

namespace stlmc {

struct ZRatioCheck {
  double ratio = 1.0;        // Z_beta / Z_alpha
  double lower_bound = 0.0;  // 1/2 exp(-2 (beta - alpha) (D/sigma + (sqrt d + sqrt ln(2/w_min)) / sqrt alpha)^2)
  bool holds(double tol = 1e-9) const { return ratio >= lower_bound - tol && ratio <= 1.0 + tol; }
};

/// Lower end of the Z_beta / Z_alpha interval. Distances are measured in
/// units of sigma, so the bound is scale-free.
inline double z_ratio_lower_bound(const GaussianMixture& mixture, double alpha, double beta) {
  const double d = static_cast<double>(mixture.dim());
  const double reach = mixture.radius() / std::sqrt(mixture.sigma2()) +
                       (std::sqrt(d) + std::sqrt(std::log(2.0 / mixture.w_min()))) / std::sqrt(alpha);
  return 0.5 * std::exp(-2.0 * (beta - alpha) * reach * reach);
}

/// Z_beta / Z_alpha by quadrature (d <= 2) against [lower bound, 1].
inline ZRatioCheck z_ratio_bound_check(const GaussianMixture& mixture, double alpha, double beta,
                                       const QuadratureOptions& options = {}) {
  detail::require(alpha > 0.0 && alpha <= beta && beta <= 1.0, ErrorCode::invalid_argument,
                  "need 0 < alpha <= beta <= 1");
  ZRatioCheck c;
  c.ratio = alpha == beta ? 1.0
                          : std::exp(log_partition_function(mixture, beta, options) -
                                     log_partition_function(mixture, alpha, options));
  c.lower_bound = z_ratio_lower_bound(mixture, alpha, beta);
  return c;
}

/// alpha x^2/2 plus the lower convex envelope of f - alpha x^2/2, on a 1D
/// uniform grid. The result is alpha-strongly convex and pointwise <= f.
inline std::vector<double> sce_envelope_1d(std::span<const double> xs, std::span<const double> fs, double alpha) {
  const std::size_t n = xs.size();
  detail::require(n == fs.size(), ErrorCode::dimension_mismatch, "grid and values differ in length");
  detail::require(n >= 50, ErrorCode::invalid_argument, "grid too coarse: at least 50 points are required");
  detail::require(alpha > 0.0, ErrorCode::invalid_argument, "alpha must be positive");
  const double h = (xs[n - 1] - xs[0]) / static_cast<double>(n - 1);
  detail::require(h > 0.0, ErrorCode::invalid_argument, "grid must be increasing");
  for (std::size_t i = 1; i < n; ++i)
    detail::require(std::abs(xs[i] - xs[i - 1] - h) <= 1e-9 * std::max(1.0, std::abs(h)), ErrorCode::invalid_argument,
                    "grid must be uniform");

  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = fs[i] - 0.5 * alpha * xs[i] * xs[i];
  // Andrew's monotone chain, lower hull only.
  std::vector<std::size_t> hull;
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (xs[a] - xs[o]) * (g[b] - g[o]) - (g[a] - g[o]) * (xs[b] - xs[o]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) <= 0.0) hull.pop_back();
    hull.push_back(i);
  }
  std::vector<double> out(n);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const std::size_t a = hull[s], b = hull[s + 1];
    for (std::size_t i = a; i <= b; ++i) {
      const double v = g[a] + (g[b] - g[a]) * (xs[i] - xs[a]) / (xs[b] - xs[a]);
      out[i] = std::min(v, g[i]) + 0.5 * alpha * xs[i] * xs[i];
    }
  }
  return out;
}

struct DriftCheck {
  double start_mean = 0.0;  // E|X_0 - x*|^2
  double end_mean = 0.0;    // E|X_T - x*|^2
  double standard_error = 0.0;
  double budget = 0.0;      // (4 beta D^2 / sigma^2 + 2 d) T
  bool holds() const { return end_mean <= start_mean + budget + 3.0 * standard_error; }
};

/// Monte-Carlo check of E|X_T - x*|^2 <= E|X_0 - x*|^2 + (4 beta D^2 / sigma^2 + 2d) T
/// for the discretized chain run for one macro-step of length T, with
/// X_0 ~ N(x*, sigma^2/beta I). Trajectory k uses stream (seed, 0, k).
template <Target T>
DriftCheck drift_check(const T& target, const LangevinParams& params, std::span<const double> x_star,
                       std::size_t trajectories, std::uint64_t seed) {
  params.validate(target.mixture());
  detail::check_point(target, x_star);
  detail::require(trajectories >= 2, ErrorCode::invalid_argument, "need at least two trajectories");
  const auto& mix = target.mixture();
  const std::size_t d = target.dim();
  const double sd = std::sqrt(mix.sigma2() / params.beta);
  std::vector<double> end(trajectories);
  double start_sum = 0.0;
  Point x(d), noise(d), grad(d);
  for (std::size_t k = 0; k < trajectories; ++k) {
    Rng rng = Rng::stream(seed, 0, k);
    for (std::size_t j = 0; j < d; ++j) x[j] = x_star[j] + sd * rng.normal();
    start_sum += detail::squared_distance(x, x_star);
    detail::macro_step_inplace(target, params, x, rng, noise, grad);
    end[k] = detail::squared_distance(x, x_star);
  }
  DriftCheck c;
  const double n = static_cast<double>(trajectories);
  c.start_mean = start_sum / n;
  for (double v : end) c.end_mean += v;
  c.end_mean /= n;
  double var = 0.0;
  for (double v : end) var += (v - c.end_mean) * (v - c.end_mean);
  c.standard_error = std::sqrt(var / (n - 1.0) / n);
  c.budget = (4.0 * params.beta * mix.radius() * mix.radius() / mix.sigma2() + 2.0 * static_cast<double>(d)) * params.T;
  return c;
}

}  // namespace stlmc
