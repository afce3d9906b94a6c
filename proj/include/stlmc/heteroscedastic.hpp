#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/mixture.hpp"

namespace stlmc {

/// Mixture of spherical Gaussians with per-component variances, used only to
/// show where tempering stops working. f = -log sum_i w_i (s_min/s_i)^d
/// exp(-|x - mu_i|^2 / (2 s_i^2)) is nonnegative. mixture() reports the
/// equal-variance mixture with the smallest variance, which supplies the
/// ladder scales; it is not the sampling target, so exact sampling does not apply.
class HeteroscedasticMixture {
 public:
  HeteroscedasticMixture(std::vector<double> weights, std::vector<Point> means, std::vector<double> variances)
      : shape_(weights, means, *std::min_element(variances.begin(), variances.end())),
        variances_(std::move(variances)) {
    detail::require(variances_.size() == shape_.components(), ErrorCode::invalid_argument,
                    "one variance per component is required");
    for (double v : variances_)
      detail::require(std::isfinite(v) && v > 0.0, ErrorCode::invalid_argument, "variances must be positive");
    const double d = static_cast<double>(shape_.dim());
    log_scale_.resize(variances_.size());
    for (std::size_t i = 0; i < variances_.size(); ++i)
      log_scale_[i] = std::log(shape_.weights()[i]) + 0.5 * d * std::log(shape_.sigma2() / variances_[i]);
  }

  std::size_t dim() const noexcept { return shape_.dim(); }
  const GaussianMixture& mixture() const noexcept { return shape_; }
  double perturbation_bound() const noexcept { return 0.0; }
  const std::vector<double>& variances() const noexcept { return variances_; }

  double value(std::span<const double> x) const {
    auto& z = detail::scratch();
    logits(x, z);
    return -detail::log_sum_exp(z);
  }

  double value_and_gradient(std::span<const double> x, std::span<double> grad) const {
    auto& z = detail::scratch();
    logits(x, z);
    const double lse = detail::log_sum_exp(z);
    std::fill(grad.begin(), grad.end(), 0.0);
    const auto& means = shape_.means();
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double r = std::exp(z[i] - lse) / variances_[i];
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += r * (x[j] - means[i][j]);
    }
    return -lse;
  }

 private:
  void logits(std::span<const double> x, std::vector<double>& z) const {
    z.resize(variances_.size());
    const auto& means = shape_.means();
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = log_scale_[i] - detail::squared_distance(x, means[i]) / (2.0 * variances_[i]);
  }

  GaussianMixture shape_;
  std::vector<double> variances_;
  std::vector<double> log_scale_;
};

}  // namespace stlmc
