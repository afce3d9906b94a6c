#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "stlmc/error.hpp"

namespace stlmc {

/// Log-domain partition function estimates, one per ladder level, anchored at
/// log Z^_1 = 0.
struct PartitionEstimates {
  std::vector<double> log_zhat{0.0};

  std::size_t size() const noexcept { return log_zhat.size(); }

  void validate() const {
    detail::require(!log_zhat.empty(), ErrorCode::invalid_argument, "estimates must cover at least one level");
    detail::require(log_zhat.front() == 0.0, ErrorCode::invalid_argument, "log Z^_1 must be exactly 0");
    for (double v : log_zhat)
      detail::require(std::isfinite(v), ErrorCode::non_finite, "partition estimates must be finite");
  }

  /// Re-anchor an arbitrary list of log normalizers so the first entry is 0.
  static PartitionEstimates anchored(const std::vector<double>& log_z) {
    PartitionEstimates e;
    e.log_zhat = log_z;
    const double base = log_z.at(0);
    for (double& v : e.log_zhat) v -= base;
    e.log_zhat.front() = 0.0;
    e.validate();
    return e;
  }
};

}  // namespace stlmc
