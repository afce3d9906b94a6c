#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "stlmc/error.hpp"
#include "stlmc/finite_chain.hpp"
#include "stlmc/mixture.hpp"

namespace stlmc {

/// Nearest-neighbor generator on a uniform grid over [-R, R]^d (d <= 2) with
/// rates min(1, p(x')/p(x)) / h^2. It is reversible for the grid-restricted
/// p_beta and approximates Laplacian - beta grad f . grad.
struct DiscretizedGenerator {
  double beta = 1.0;
  double radius = 0.0;
  double h = 0.0;
  std::size_t cells_per_axis = 0;
  std::size_t dim = 1;
  std::vector<Point> points;
  Vector pi;     // normalized grid density
  Matrix rates;  // generator: off-diagonal rates, rows sum to 0

  std::size_t size() const noexcept { return points.size(); }

  /// pi^{1/2} G pi^{-1/2}, symmetrized.
  Matrix symmetric_generator() const {
    const Vector s = pi.cwiseSqrt();
    Matrix S = s.asDiagonal() * rates * s.cwiseInverse().asDiagonal();
    return 0.5 * (S + S.transpose());
  }

  /// Eigenvalues of -G, ascending; the first is 0.
  Vector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(-symmetric_generator(), Eigen::EigenvaluesOnly);
    Vector ev = solver.eigenvalues();
    ev(0) = std::max(0.0, ev(0));
    return ev;
  }

  double spectral_gap() const { return size() < 2 ? 0.0 : eigenvalues()(1); }

  /// Transition matrix exp(T G), by scaling-and-squaring on the symmetrized
  /// generator and conjugating back.
  FiniteChain to_chain(double T) const {
    detail::require(T > 0.0, ErrorCode::invalid_argument, "T must be positive");
    const Vector s = pi.cwiseSqrt();
    const Matrix E = (T * symmetric_generator()).exp();
    Matrix P = s.cwiseInverse().asDiagonal() * E * s.asDiagonal();
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      P.row(i) = P.row(i).cwiseMax(0.0);
      P.row(i) /= P.row(i).sum();
    }
    FiniteChain chain(std::move(P), pi);
    chain.points = points;
    return chain;
  }
};

/// Largest state count for dense eigen-solves and exponentials.
inline constexpr std::size_t max_generator_states = 2000;

template <Target T>
DiscretizedGenerator discretize_langevin_generator(const T& target, double beta, double R, std::size_t n_cells) {
  const std::size_t d = target.dim();
  if (d > 2)
    throw Error(ErrorCode::unsupported_dimension,
                "discretized generators are limited to d <= 2 (dense eigen-solve), got d = " + std::to_string(d));
  detail::require(beta > 0.0 && beta <= 1.0, ErrorCode::invalid_argument, "beta must lie in (0, 1]");
  const auto& mix = target.mixture();
  const double min_radius = mix.radius() + 6.0 * std::sqrt(mix.sigma2() / beta);
  detail::require(R >= min_radius - 1e-12, ErrorCode::invalid_argument,
                  "R = " + std::to_string(R) + " is below D + 6 sigma / sqrt(beta) = " + std::to_string(min_radius));
  detail::require(n_cells >= 2, ErrorCode::invalid_argument, "need at least two cells per axis");
  const std::size_t states = d == 1 ? n_cells : n_cells * n_cells;
  detail::require(states <= max_generator_states, ErrorCode::invalid_argument,
                  "grid has " + std::to_string(states) + " states, above the dense limit of " +
                      std::to_string(max_generator_states));

  DiscretizedGenerator g;
  g.beta = beta;
  g.radius = R;
  g.dim = d;
  g.cells_per_axis = n_cells;
  g.h = 2.0 * R / static_cast<double>(n_cells);
  g.points.reserve(states);
  auto center = [&](std::size_t k) { return -R + (static_cast<double>(k) + 0.5) * g.h; };
  if (d == 1) {
    for (std::size_t k = 0; k < n_cells; ++k) g.points.push_back({center(k)});
  } else {
    for (std::size_t a = 0; a < n_cells; ++a)
      for (std::size_t b = 0; b < n_cells; ++b) g.points.push_back({center(a), center(b)});
  }
  std::vector<double> log_p(states);
  for (std::size_t s = 0; s < states; ++s) log_p[s] = -beta * target.value(g.points[s]);
  const double lse = detail::log_sum_exp(log_p);
  g.pi.resize(detail::idx(states));
  for (std::size_t s = 0; s < states; ++s) g.pi(detail::idx(s)) = std::exp(log_p[s] - lse);

  g.rates = Matrix::Zero(detail::idx(states), detail::idx(states));
  const double inv_h2 = 1.0 / (g.h * g.h);
  auto link = [&](std::size_t s, std::size_t t) {
    g.rates(detail::idx(s), detail::idx(t)) = std::exp(std::min(0.0, log_p[t] - log_p[s])) * inv_h2;
    g.rates(detail::idx(t), detail::idx(s)) = std::exp(std::min(0.0, log_p[s] - log_p[t])) * inv_h2;
  };
  if (d == 1) {
    for (std::size_t k = 0; k + 1 < n_cells; ++k) link(k, k + 1);
  } else {
    for (std::size_t a = 0; a < n_cells; ++a)
      for (std::size_t b = 0; b < n_cells; ++b) {
        const std::size_t s = a * n_cells + b;
        if (b + 1 < n_cells) link(s, s + 1);
        if (a + 1 < n_cells) link(s, s + n_cells);
      }
  }
  for (Eigen::Index i = 0; i < g.rates.rows(); ++i) g.rates(i, i) = -g.rates.row(i).sum();
  return g;
}

/// Default grid radius D + 6 sigma / sqrt(beta).
inline double generator_radius(const GaussianMixture& mixture, double beta) {
  return mixture.radius() + 6.0 * std::sqrt(mixture.sigma2() / beta);
}

struct PerturbationGapCheck {
  std::vector<double> ratios;  // lambda_k(f) / lambda_k(f_tilde) for the first nonzero eigenvalues
  double lower = 1.0;
  double upper = 1.0;
  bool holds(double tol = 1e-9) const {
    return std::all_of(ratios.begin(), ratios.end(),
                       [&](double r) { return r >= lower * (1.0 - tol) && r <= upper * (1.0 + tol); });
  }
  double max_log_deviation() const {
    double out = 0.0;
    for (double r : ratios) out = std::max(out, std::abs(std::log(r)));
    return out;
  }
};

/// Ratios of the first `count` nonzero eigenvalues of -G for f and f_tilde,
/// checked against [e^{-2 Delta}, e^{2 Delta}] where Delta = beta sup |f - f_tilde|.
inline PerturbationGapCheck perturbation_gap_check(const DiscretizedGenerator& perturbed,
                                                   const DiscretizedGenerator& base, double delta,
                                                   std::size_t count = 5) {
  detail::require(perturbed.size() == base.size(), ErrorCode::dimension_mismatch, "generators differ in size");
  detail::require(delta >= 0.0, ErrorCode::invalid_argument, "Delta must be nonnegative");
  const Vector a = perturbed.eigenvalues();
  const Vector b = base.eigenvalues();
  PerturbationGapCheck out;
  out.lower = std::exp(-2.0 * delta);
  out.upper = std::exp(2.0 * delta);
  const std::size_t n = std::min<std::size_t>(count, perturbed.size() - 1);
  for (std::size_t k = 1; k <= n; ++k) out.ratios.push_back(a(detail::idx(k)) / b(detail::idx(k)));
  return out;
}

}  // namespace stlmc
