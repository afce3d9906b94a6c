#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/rng.hpp"

namespace stlmc {

/// One draw from the mixture sum_i w_i N(mu_i, sigma2/beta I).
inline void sample_scaled_mixture(const GaussianMixture& mixture, double beta, Rng& rng, std::span<double> out) {
  const auto& w = mixture.weights();
  double u = rng.uniform();
  std::size_t i = 0;
  while (i + 1 < w.size() && u >= w[i]) {
    u -= w[i];
    ++i;
  }
  const double sd = std::sqrt(mixture.sigma2() / beta);
  const auto& mu = mixture.means()[i];
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = mu[j] + sd * rng.normal();
}

/// Exact draw from p_beta proportional to exp(-beta f) by rejection from the
/// scaled mixture g~_beta. The envelope uses g_beta <= g~_beta / w_min and
/// |f - f_tilde| <= Delta, so acceptance is at least w_min e^{-2 beta Delta}.
template <Target T>
Point sample_exact(const T& target, double beta, Rng& rng) {
  detail::require(beta > 0.0 && beta <= 1.0, ErrorCode::invalid_argument, "beta must lie in (0, 1]");
  const auto& mix = target.mixture();
  const double log_envelope = std::log(mix.w_min()) - beta * target.perturbation_bound();
  Point x(target.dim());
  std::vector<double> z(mix.components());
  for (;;) {
    sample_scaled_mixture(mix, beta, rng, x);
    mix.component_logits(x, beta, z);
    const double log_accept = log_envelope - beta * target.value(x) - detail::log_sum_exp(z);
    if (std::log(rng.uniform()) < log_accept) return x;
  }
}

template <Target T>
std::vector<Point> sample_exact(const T& target, double beta, std::size_t n, Rng& rng) {
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_exact(target, beta, rng));
  return out;
}

}  // namespace stlmc
