#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stlmc/error.hpp"

namespace stlmc {

using Point = std::vector<double>;

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

/// log(sum(exp(v))) with max-subtraction; -inf for an all -inf input.
inline double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double a : v) s += std::exp(a - m);
  return m + std::log(s);
}

inline std::vector<double>& scratch() {
  thread_local std::vector<double> buffer;
  return buffer;
}

inline void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, std::string(what) + " has a non-finite entry");
  }
}

}  // namespace detail

/// Mixture of spherical Gaussians sharing variance sigma2. Defines
///   f(x) = -log sum_i w_i exp(-|x - mu_i|^2 / (2 sigma2)),
/// which is nonnegative because each bump is at most 1.
class GaussianMixture {
 public:
  GaussianMixture(std::vector<double> weights, std::vector<Point> means, double sigma2)
      : weights_(std::move(weights)), means_(std::move(means)), sigma2_(sigma2) {
    detail::require(!weights_.empty(), ErrorCode::invalid_argument, "mixture needs at least one component");
    detail::require(weights_.size() == means_.size(), ErrorCode::invalid_argument,
                    "weights and means have different lengths");
    detail::require(std::isfinite(sigma2_) && sigma2_ > 0.0, ErrorCode::invalid_argument,
                    "sigma2 must be positive");
    dim_ = means_.front().size();
    detail::require(dim_ > 0, ErrorCode::invalid_argument, "means must have positive dimension");
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      detail::require(std::isfinite(weights_[i]) && weights_[i] > 0.0, ErrorCode::invalid_argument,
                      "weights must be positive");
      detail::require(means_[i].size() == dim_, ErrorCode::dimension_mismatch,
                      "all means must share one dimension");
      detail::require_finite(means_[i], "mean");
      total += weights_[i];
    }
    detail::require(std::abs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument,
                    "weights must sum to 1 (within 1e-12)");
    log_weights_.resize(weights_.size());
    std::transform(weights_.begin(), weights_.end(), log_weights_.begin(), [](double w) { return std::log(w); });
    radius_ = 0.0;
    for (const auto& mu : means_) radius_ = std::max(radius_, std::sqrt(detail::squared_distance(mu, Point(dim_, 0.0))));
    w_min_ = *std::min_element(weights_.begin(), weights_.end());
  }

  std::size_t components() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  double sigma2() const noexcept { return sigma2_; }
  /// D = max_i |mu_i|.
  double radius() const noexcept { return radius_; }
  double w_min() const noexcept { return w_min_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Point>& means() const noexcept { return means_; }

  const GaussianMixture& mixture() const noexcept { return *this; }
  /// sup |f - f_tilde|; zero for an exact mixture.
  double perturbation_bound() const noexcept { return 0.0; }

  /// Per-component log terms log w_i - beta |x - mu_i|^2 / (2 sigma2).
  void component_logits(std::span<const double> x, double beta, std::span<double> out) const {
    const double scale = beta / (2.0 * sigma2_);
    for (std::size_t i = 0; i < weights_.size(); ++i)
      out[i] = log_weights_[i] - scale * detail::squared_distance(x, means_[i]);
  }

  double value(std::span<const double> x) const {
    auto& z = detail::scratch();
    z.resize(weights_.size());
    component_logits(x, 1.0, z);
    return -detail::log_sum_exp(z);
  }

  double value_and_gradient(std::span<const double> x, std::span<double> grad) const {
    auto& z = detail::scratch();
    const std::size_t n = weights_.size();
    z.resize(n);
    component_logits(x, 1.0, z);
    const double lse = detail::log_sum_exp(z);
    // grad = (x - sum_i r_i mu_i) / sigma2 with responsibilities r = softmax(z)
    for (std::size_t j = 0; j < dim_; ++j) grad[j] = x[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::exp(z[i] - lse);
      const auto& mu = means_[i];
      for (std::size_t j = 0; j < dim_; ++j) grad[j] -= r * mu[j];
    }
    for (std::size_t j = 0; j < dim_; ++j) grad[j] /= sigma2_;
    return -lse;
  }

  void gradient(std::span<const double> x, std::span<double> grad) const { value_and_gradient(x, grad); }

 private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<Point> means_;
  double sigma2_;
  std::size_t dim_ = 0;
  double radius_ = 0.0;
  double w_min_ = 1.0;
};

/// Bounded additive perturbation delta(x) with certified sup-norm bounds:
/// |delta| <= sup_bound and |grad delta| <= grad_bound everywhere.
struct Perturbation {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  double sup_bound = 0.0;   // Delta
  double grad_bound = 0.0;  // tau
  double amplitude = 0.0;
  double scale = 1.0;
};

/// delta(x) = a * prod_j sin(x_j / s). Delta = a, tau = a sqrt(d) / s.
inline Perturbation sine_perturbation(double amplitude, double scale, std::size_t dim) {
  detail::require(std::isfinite(amplitude) && amplitude >= 0.0, ErrorCode::invalid_argument,
                  "perturbation amplitude must be nonnegative");
  detail::require(std::isfinite(scale) && scale > 0.0, ErrorCode::invalid_argument,
                  "perturbation scale must be positive");
  Perturbation p;
  p.amplitude = amplitude;
  p.scale = scale;
  p.sup_bound = amplitude;
  p.grad_bound = amplitude * std::sqrt(static_cast<double>(dim)) / scale;
  p.value = [amplitude, scale](std::span<const double> x) {
    double prod = amplitude;
    for (double v : x) prod *= std::sin(v / scale);
    return prod;
  };
  p.gradient = [amplitude, scale](std::span<const double> x, std::span<double> g) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      double prod = amplitude / scale;
      for (std::size_t k = 0; k < x.size(); ++k)
        prod *= (k == j) ? std::cos(x[k] / scale) : std::sin(x[k] / scale);
      g[j] = prod;
    }
  };
  return p;
}

/// f = f_tilde + delta where f_tilde is an exact mixture and delta is bounded.
class PerturbedTarget {
 public:
  PerturbedTarget(GaussianMixture base, Perturbation perturbation)
      : base_(std::move(base)), perturbation_(std::move(perturbation)) {
    detail::require(static_cast<bool>(perturbation_.value) && static_cast<bool>(perturbation_.gradient),
                    ErrorCode::invalid_argument, "perturbation needs value and gradient");
  }

  std::size_t dim() const noexcept { return base_.dim(); }
  const GaussianMixture& mixture() const noexcept { return base_; }
  const Perturbation& perturbation() const noexcept { return perturbation_; }
  double sup_bound() const noexcept { return perturbation_.sup_bound; }
  double grad_bound() const noexcept { return perturbation_.grad_bound; }
  double perturbation_bound() const noexcept { return perturbation_.sup_bound; }

  double value(std::span<const double> x) const { return base_.value(x) + perturbation_.value(x); }

  double value_and_gradient(std::span<const double> x, std::span<double> grad) const {
    const double f = base_.value_and_gradient(x, grad);
    thread_local std::vector<double> extra;
    extra.resize(grad.size());
    perturbation_.gradient(x, extra);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += extra[j];
    return f + perturbation_.value(x);
  }

  void gradient(std::span<const double> x, std::span<double> grad) const { value_and_gradient(x, grad); }

 private:
  GaussianMixture base_;
  Perturbation perturbation_;
};

/// Anything with a potential f, its gradient, and an underlying spherical
/// mixture supplying the structural scales (sigma2, D, w_min).
template <class T>
concept Target = requires(const T& t, std::span<const double> x, std::span<double> g) {
  { t.dim() } -> std::convertible_to<std::size_t>;
  { t.value(x) } -> std::convertible_to<double>;
  { t.value_and_gradient(x, g) } -> std::convertible_to<double>;
  { t.mixture() } -> std::convertible_to<const GaussianMixture&>;
  { t.perturbation_bound() } -> std::convertible_to<double>;
};

namespace detail {

template <Target T>
void check_point(const T& target, std::span<const double> x) {
  if (x.size() != target.dim())
    throw Error(ErrorCode::dimension_mismatch,
                "point has dimension " + std::to_string(x.size()) + ", target has " + std::to_string(target.dim()));
  require_finite(x, "point");
}

}  // namespace detail

/// f(x), validated.
template <Target T>
double log_density_negf(const T& target, std::span<const double> x) {
  detail::check_point(target, x);
  return target.value(x);
}

/// grad f(x), validated.
template <Target T>
Point grad_f(const T& target, std::span<const double> x) {
  detail::check_point(target, x);
  Point g(x.size());
  target.value_and_gradient(x, g);
  return g;
}

struct LocateMinOptions {
  double step_factor = 0.1;  // step = step_factor * sigma2
  std::size_t max_iterations = 10000;
  double grad_tolerance = 1e-8;
};

/// Approximate argmin of f by gradient descent from each mean and the origin.
/// Returns the lowest-f endpoint; throws NotConvergedError (carrying that
/// endpoint) only when no start reaches the gradient tolerance.
template <Target T>
Point locate_min(const T& target, const LocateMinOptions& options = {}) {
  const auto& mix = target.mixture();
  const double step = options.step_factor * mix.sigma2();
  std::vector<Point> starts = mix.means();
  starts.emplace_back(target.dim(), 0.0);

  Point best;
  double best_f = std::numeric_limits<double>::infinity();
  double best_g = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  Point grad(target.dim());

  for (auto x : starts) {
    bool converged = false;
    double f = target.value_and_gradient(x, grad);
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      double gnorm = 0.0;
      for (double g : grad) gnorm += g * g;
      if (std::sqrt(gnorm) <= options.grad_tolerance) {
        converged = true;
        break;
      }
      for (std::size_t j = 0; j < x.size(); ++j) x[j] -= step * grad[j];
      f = target.value_and_gradient(x, grad);
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm <= options.grad_tolerance) converged = true;
    any_converged = any_converged || converged;
    if (f < best_f) {
      best_f = f;
      best = x;
      best_g = gnorm;
    }
  }
  if (!any_converged)
    throw NotConvergedError("gradient descent did not reach the tolerance from any start", best, best_f, best_g);
  return best;
}

/// Largest eigenvalue of the Hessian of f at x, by central differences of the
/// analytic gradient.
inline double hessian_max_eig(const GaussianMixture& mixture, std::span<const double> x, double h = 1e-5) {
  detail::check_point(mixture, x);
  const std::size_t d = mixture.dim();
  Eigen::MatrixXd hess(d, d);
  Point xp(x.begin(), x.end()), xm(x.begin(), x.end()), gp(d), gm(d);
  const double step = h * std::sqrt(mixture.sigma2());
  for (std::size_t j = 0; j < d; ++j) {
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    mixture.value_and_gradient(xp, gp);
    mixture.value_and_gradient(xm, gm);
    for (std::size_t i = 0; i < d; ++i) hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (gp[i] - gm[i]) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  const Eigen::MatrixXd sym = 0.5 * (hess + hess.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

/// g_beta(x) / g~_beta(x) where g_beta = exp(-beta f) and
/// g~_beta = sum_i w_i exp(-beta |x - mu_i|^2 / (2 sigma2)). Lies in [1, 1/w_min].
inline double close_to_sum_ratio(const GaussianMixture& mixture, double beta, std::span<const double> x) {
  detail::require(beta > 0.0 && beta <= 1.0, ErrorCode::invalid_argument, "beta must lie in (0, 1]");
  detail::check_point(mixture, x);
  Point z(mixture.components());
  mixture.component_logits(x, 1.0, z);
  const double log_g = beta * detail::log_sum_exp(z);
  mixture.component_logits(x, beta, z);
  const double log_g_tilde = detail::log_sum_exp(z);
  return std::exp(log_g - log_g_tilde);
}

}  // namespace stlmc
