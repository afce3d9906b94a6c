#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/rng.hpp"

namespace stlmc {

/// Unadjusted Langevin at inverse temperature beta: step size eta, and T/eta
/// steps per macro-step.
struct LangevinParams {
  double eta = 0.01;
  double T = 1.0;
  double beta = 1.0;

  std::size_t steps_per_macro() const {
    return static_cast<std::size_t>(std::max(1.0, std::round(T / eta)));
  }

  /// eta <= sigma2 / 2 is the discretization precondition.
  void validate(const GaussianMixture& mixture) const {
    detail::require(std::isfinite(eta) && eta > 0.0, ErrorCode::invalid_argument, "eta must be positive");
    detail::require(std::isfinite(T) && T > 0.0, ErrorCode::invalid_argument, "T must be positive");
    detail::require(beta > 0.0 && beta <= 1.0, ErrorCode::invalid_argument, "beta must lie in (0, 1]");
    detail::require(eta <= mixture.sigma2() / 2.0, ErrorCode::invalid_argument,
                    "eta = " + std::to_string(eta) + " violates eta <= sigma2/2 = " +
                        std::to_string(mixture.sigma2() / 2.0));
  }
};

namespace detail {

/// x <- x - eta beta grad f(x) + sqrt(2 eta) noise, in place. `grad` is scratch.
template <Target T>
void langevin_update(const T& target, double eta, double beta, std::span<double> x, std::span<const double> noise,
                     std::span<double> grad) {
  target.value_and_gradient(x, grad);
  const double drift = eta * beta;
  const double diffusion = std::sqrt(2.0 * eta);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(grad[j]))
      throw NonFiniteGradientError("non-finite gradient during Langevin step", Point(x.begin(), x.end()));
    x[j] += -drift * grad[j] + diffusion * noise[j];
  }
}

/// Workspace-carrying macro step used by the tempering chain.
template <Target T>
void macro_step_inplace(const T& target, const LangevinParams& params, std::span<double> x, Rng& rng,
                        std::span<double> noise, std::span<double> grad) {
  const std::size_t steps = params.steps_per_macro();
  for (std::size_t s = 0; s < steps; ++s) {
    rng.fill_normal(noise);
    langevin_update(target, params.eta, params.beta, x, noise, grad);
  }
}

}  // namespace detail

/// One discretized Langevin step with externally supplied standard normals.
template <Target T>
Point langevin_step(const T& target, const LangevinParams& params, std::span<const double> x,
                    std::span<const double> noise) {
  detail::check_point(target, x);
  detail::require(noise.size() == x.size(), ErrorCode::dimension_mismatch, "noise dimension differs from x");
  Point next(x.begin(), x.end());
  Point grad(x.size());
  detail::langevin_update(target, params.eta, params.beta, next, noise, grad);
  return next;
}

/// steps_per_macro() Langevin steps with fresh noise from `rng`.
template <Target T>
Point run_macro_step(const T& target, const LangevinParams& params, std::span<const double> x, Rng& rng) {
  detail::check_point(target, x);
  Point next(x.begin(), x.end());
  Point noise(x.size()), grad(x.size());
  detail::macro_step_inplace(target, params, next, rng, noise, grad);
  return next;
}

}  // namespace stlmc
