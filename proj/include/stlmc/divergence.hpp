#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "stlmc/error.hpp"

namespace stlmc {

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b) {
  require(a == b, ErrorCode::dimension_mismatch, "distributions have different lengths");
}

}  // namespace detail

/// Half the l1 distance between two mass vectors.
inline double tv_distance(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// chi^2(p || q) = sum_i q_i^2 / p_i - 1; the second argument is in the
/// numerator. +inf when some q_i > 0 sits on an atom with p_i = 0.
inline double chi_sq_divergence(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += q[i] * q[i] / p[i];
  }
  return std::max(0.0, s - 1.0);
}

/// KL(p || q) = sum_i p_i log(p_i / q_i) with 0 log 0 = 0; +inf when some
/// p_i > 0 has q_i = 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, s);
}

/// Result of an inequality check lhs <= rhs.
struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double tol = 1e-10) const { return lhs <= rhs + tol * std::max(1.0, std::abs(rhs)); }
};

namespace detail {

inline std::vector<double> mix(std::span<const double> weights, const std::vector<std::vector<double>>& components) {
  require(weights.size() == components.size() && !components.empty(), ErrorCode::invalid_argument,
          "one weight per component is required");
  std::vector<double> out(components.front().size(), 0.0);
  for (std::size_t i = 0; i < components.size(); ++i) {
    require_same_size(components[i].size(), out.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights[i] * components[i][k];
  }
  return out;
}

}  // namespace detail

/// chi^2(sum_i w_i p_i || q) <= sum_i w_i chi^2(p_i || q).
inline InequalityCheck chi_sq_mixture_check(const std::vector<std::vector<double>>& components,
                                            std::span<const double> weights, std::span<const double> q) {
  const std::vector<double> p = detail::mix(weights, components);
  InequalityCheck c;
  c.lhs = chi_sq_divergence(p, q);
  for (std::size_t i = 0; i < components.size(); ++i) c.rhs += weights[i] * chi_sq_divergence(components[i], q);
  return c;
}

/// KL(sum w_i p_i || sum w'_i q_i) <= KL(w || w') + sum_i w_i KL(p_i || q_i).
inline InequalityCheck kl_decomposition_check(std::span<const double> w, std::span<const double> w_prime,
                                              const std::vector<std::vector<double>>& p,
                                              const std::vector<std::vector<double>>& q) {
  detail::require_same_size(w.size(), w_prime.size());
  detail::require_same_size(p.size(), q.size());
  InequalityCheck c;
  c.lhs = kl_divergence(detail::mix(w, p), detail::mix(w_prime, q));
  c.rhs = kl_divergence(w, w_prime);
  for (std::size_t i = 0; i < p.size(); ++i) c.rhs += w[i] * kl_divergence(p[i], q[i]);
  return c;
}

}  // namespace stlmc
