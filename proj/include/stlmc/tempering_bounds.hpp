#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/finite_chain.hpp"
#include "stlmc/tempering.hpp"

namespace stlmc {

/// Explicit simulated tempering chain on Omega x [L]; state (x, i) has index
/// i * |Omega| + x.
struct FiniteTemperingChain {
  FiniteChain chain;
  std::vector<FiniteChain> levels;
  std::vector<double> rel_weights;
  ProposalMode mode = ProposalMode::neighbor;

  std::size_t level_count() const noexcept { return levels.size(); }
  std::size_t base_size() const noexcept { return levels.front().size(); }
  /// r = min r_i / max r_i.
  double weight_ratio() const {
    const auto [lo, hi] = std::minmax_element(rel_weights.begin(), rel_weights.end());
    return *lo / *hi;
  }
};

/// Type 1 with probability 1/2 (a step of the level's own chain), Type 2 with
/// probability 1/2 (propose a level, accept with min{r_j p_j(x) / (r_i p_i(x)), 1}
/// using the exact normalized p_i). The result is stationary for r_i p_i(x),
/// which is asserted.
inline FiniteTemperingChain build_tempering_chain(const std::vector<FiniteChain>& base_chains,
                                                  const std::vector<double>& rel_weights, ProposalMode mode) {
  detail::require(!base_chains.empty(), ErrorCode::invalid_argument, "at least one level is required");
  detail::require(rel_weights.size() == base_chains.size(), ErrorCode::invalid_argument,
                  "one relative weight per level is required");
  const std::size_t n = base_chains.front().size();
  for (const auto& c : base_chains)
    detail::require(c.size() == n, ErrorCode::dimension_mismatch, "base chains must share one state set");
  const double total = std::accumulate(rel_weights.begin(), rel_weights.end(), 0.0);
  for (double r : rel_weights) detail::require(r > 0.0, ErrorCode::invalid_argument, "rel_weights must be positive");
  detail::require(std::abs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument, "rel_weights must sum to 1");

  const std::size_t L = base_chains.size();
  const auto N = detail::idx(n * L);
  Matrix P = Matrix::Zero(N, N);
  Vector pi(N);
  std::vector<std::pair<std::size_t, double>> proposals;
  for (std::size_t i = 0; i < L; ++i) {
    const FiniteChain& c = base_chains[i];
    proposals.clear();
    if (mode == ProposalMode::uniform) {
      for (std::size_t j = 0; j < L; ++j) proposals.emplace_back(j, 1.0 / static_cast<double>(L));
    } else {
      proposals.emplace_back(i == 0 ? i : i - 1, 0.5);
      proposals.emplace_back(i + 1 < L ? i + 1 : i, 0.5);
    }
    for (std::size_t x = 0; x < n; ++x) {
      const auto s = detail::idx(i * n + x);
      pi(s) = rel_weights[i] * c.p(detail::idx(x));
      for (std::size_t y = 0; y < n; ++y) P(s, detail::idx(i * n + y)) += 0.5 * c.P(detail::idx(x), detail::idx(y));
      for (const auto& [j, q] : proposals) {
        if (j == i) {
          P(s, s) += 0.5 * q;
          continue;
        }
        const double num = rel_weights[j] * base_chains[j].p(detail::idx(x));
        const double den = rel_weights[i] * c.p(detail::idx(x));
        const double a = den > 0.0 ? std::min(1.0, num / den) : 1.0;
        P(s, detail::idx(j * n + x)) += 0.5 * q * a;
        P(s, s) += 0.5 * q * (1.0 - a);
      }
    }
  }
  FiniteTemperingChain out;
  out.chain = FiniteChain(std::move(P), std::move(pi));
  out.levels = base_chains;
  out.rel_weights = rel_weights;
  out.mode = mode;
  return out;
}

/// delta = min over 1 < i <= L and A in P_i of sum_A min(p_{i-1}, p_i) / p_i(A).
/// Equals 1 for a single level.
inline double overlap_delta(const std::vector<Vector>& distributions, const std::vector<Partition>& partitions) {
  detail::require(distributions.size() == partitions.size(), ErrorCode::invalid_argument,
                  "one partition per level is required");
  double delta = 1.0;
  for (std::size_t i = 1; i < distributions.size(); ++i) {
    const Vector& prev = distributions[i - 1];
    const Vector& cur = distributions[i];
    detail::require(prev.size() == cur.size() && static_cast<std::size_t>(cur.size()) == partitions[i].size(),
                    ErrorCode::dimension_mismatch, "distributions and partitions differ in size");
    for (const auto& block : partitions[i].all_blocks()) {
      double overlap = 0.0, mass = 0.0;
      for (auto x : block) {
        overlap += std::min(prev(detail::idx(x)), cur(detail::idx(x)));
        mass += cur(detail::idx(x));
      }
      detail::require(mass > 0.0, ErrorCode::invalid_partition, "partition block has zero mass");
      delta = std::min(delta, overlap / mass);
    }
  }
  return delta;
}

/// min over i and A in P_i of p_i(A).
inline double min_block_mass(const std::vector<Vector>& distributions, const std::vector<Partition>& partitions) {
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < distributions.size(); ++i)
    for (double m : partitions[i].masses(distributions[i])) out = std::min(out, m);
  return out;
}

/// gamma = min over i1 <= i2 and A in P_{i1} of p_{i1}(A) / p_{i2}(A).
inline double refinement_gamma(const std::vector<Vector>& distributions, const std::vector<Partition>& partitions) {
  double gamma = std::numeric_limits<double>::infinity();
  for (std::size_t i1 = 0; i1 < distributions.size(); ++i1)
    for (std::size_t i2 = i1; i2 < distributions.size(); ++i2) {
      const auto num = partitions[i1].masses(distributions[i1]);
      const auto den = partitions[i1].masses(distributions[i2]);
      for (std::size_t b = 0; b < num.size(); ++b)
        gamma = std::min(gamma, den[b] > 0.0 ? num[b] / den[b] : std::numeric_limits<double>::infinity());
    }
  return gamma;
}

struct BoundCheck {
  double bound = 0.0;
  double gap = 0.0;
  double delta = 0.0;
  double p_min = 0.0;
  double gamma = 0.0;
  double min_restricted_gap = 0.0;
  bool holds(double tol = 1e-12) const { return bound <= gap + tol; }
};

namespace detail {

inline std::vector<Vector> level_distributions(const FiniteTemperingChain& st) {
  std::vector<Vector> out;
  for (const auto& c : st.levels) out.push_back(c.p);
  return out;
}

inline void check_partitions(const FiniteTemperingChain& st, const std::vector<Partition>& partitions) {
  require(partitions.size() == st.level_count(), ErrorCode::invalid_partition, "one partition per level is required");
  for (const auto& part : partitions)
    require(part.size() == st.base_size(), ErrorCode::invalid_partition, "partition does not cover the state set");
  require(partitions.front().blocks == 1, ErrorCode::invalid_partition, "the first level's partition must be {Omega}");
}

inline double min_restricted_gap(const FiniteTemperingChain& st, const std::vector<Partition>& partitions) {
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < st.level_count(); ++i)
    for (const auto& block : partitions[i].all_blocks())
      out = std::min(out, spectral_gap(restrict_chain(st.levels[i], block)).gap);
  return out;
}

}  // namespace detail

/// Gap(M_st) >= r^4 delta^2 p_min^2 / (32 L^4) min Gap(M_i|_A). For the
/// neighbor proposal the denominator is 128 L^2 instead.
inline BoundCheck tempering_gap_bound_check(const FiniteTemperingChain& st, const std::vector<Partition>& partitions) {
  detail::check_partitions(st, partitions);
  const auto dists = detail::level_distributions(st);
  BoundCheck out;
  out.delta = overlap_delta(dists, partitions);
  out.p_min = min_block_mass(dists, partitions);
  out.min_restricted_gap = detail::min_restricted_gap(st, partitions);
  const double r = st.weight_ratio();
  const double L = static_cast<double>(st.level_count());
  const double denom = st.mode == ProposalMode::neighbor ? 128.0 * L * L : 32.0 * std::pow(L, 4);
  out.bound = std::pow(r, 4) * out.delta * out.delta * out.p_min * out.p_min / denom * out.min_restricted_gap;
  out.gap = spectral_gap(st.chain).gap;
  return out;
}

/// Gap(M_st) >= r^2 gamma delta / (32 L^3) min Gap(M_i|_A) for a chain of
/// partitions P_L refining ... refining P_1 = {Omega}.
inline BoundCheck refinement_gap_bound_check(const FiniteTemperingChain& st, const std::vector<Partition>& partitions) {
  detail::check_partitions(st, partitions);
  for (std::size_t i = 1; i < partitions.size(); ++i)
    detail::require(partitions[i].refines(partitions[i - 1]), ErrorCode::invalid_partition,
                    "partition " + std::to_string(i + 1) + " does not refine partition " + std::to_string(i));
  const auto dists = detail::level_distributions(st);
  BoundCheck out;
  out.delta = overlap_delta(dists, partitions);
  out.p_min = min_block_mass(dists, partitions);
  out.gamma = refinement_gamma(dists, partitions);
  out.min_restricted_gap = detail::min_restricted_gap(st, partitions);
  const double r = st.weight_ratio();
  const double L = static_cast<double>(st.level_count());
  out.bound = r * r * out.gamma * out.delta / (32.0 * L * L * L) * out.min_restricted_gap;
  out.gap = spectral_gap(st.chain).gap;
  return out;
}

}  // namespace stlmc
