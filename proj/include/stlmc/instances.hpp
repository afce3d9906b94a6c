#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "stlmc/finite_chain.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/rng.hpp"
#include "stlmc/tempering.hpp"
#include "stlmc/tempering_bounds.hpp"

namespace stlmc {

/// Positive weights summing to 1, bounded away from 0.
inline std::vector<double> random_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& v : w) total += (v = 0.1 + rng.uniform());
  for (auto& v : w) v /= total;
  return w;
}

/// 1-4 components in dimension 1-3, means uniform in [-4, 4]^d, sigma2 in [0.5, 2].
inline GaussianMixture random_mixture(Rng& rng, std::size_t max_dim = 3) {
  const std::size_t n = 1 + rng.index(4);
  const std::size_t d = 1 + rng.index(max_dim);
  std::vector<Point> means(n, Point(d));
  for (auto& mu : means)
    for (auto& v : mu) v = -4.0 + 8.0 * rng.uniform();
  return GaussianMixture(random_weights(n, rng), std::move(means), 0.5 + 1.5 * rng.uniform());
}

/// Renumbers labels in order of first appearance.
inline Partition compact_partition(std::vector<std::size_t> labels) {
  std::vector<std::size_t> map;
  for (auto& b : labels) {
    if (b >= map.size()) map.resize(b + 1, std::numeric_limits<std::size_t>::max());
    if (map[b] == std::numeric_limits<std::size_t>::max()) {
      std::size_t next = 0;
      for (auto m : map)
        if (m != std::numeric_limits<std::size_t>::max()) ++next;
      map[b] = next;
    }
    b = map[b];
  }
  return Partition(std::move(labels));
}

/// Splits every block of `coarse` into up to `ways` random pieces.
inline Partition random_refinement(const Partition& coarse, std::size_t ways, Rng& rng) {
  std::vector<std::size_t> labels(coarse.size());
  for (std::size_t x = 0; x < labels.size(); ++x) labels[x] = coarse.block_of[x] * ways + rng.index(ways);
  return compact_partition(std::move(labels));
}

struct TemperingInstance {
  FiniteTemperingChain chain;
  std::vector<Partition> partitions;
};

/// Independent random reversible chains on a shared state set of size 2..max_states,
/// 2..max_levels levels, random relative weights. P_1 = {Omega}; the other levels
/// get independent random partitions, or successive refinements when `refining`.
inline TemperingInstance random_tempering_instance(Rng& rng, ProposalMode mode, bool refining,
                                                   std::size_t max_states = 10, std::size_t max_levels = 3) {
  const std::size_t n = 2 + rng.index(max_states - 1);
  const std::size_t L = 2 + rng.index(max_levels - 1);
  std::vector<FiniteChain> levels;
  for (std::size_t i = 0; i < L; ++i) levels.push_back(random_reversible_chain(n, rng));
  std::vector<Partition> parts{Partition::whole(n)};
  for (std::size_t i = 1; i < L; ++i)
    parts.push_back(refining ? random_refinement(parts.back(), 2 + rng.index(2), rng)
                             : random_partition(n, 1 + rng.index(n), rng));
  return {build_tempering_chain(levels, random_weights(L, rng), mode), std::move(parts)};
}

/// Two levels on `clusters` x `size` states. Level 1 is the complete uniform
/// chain; level 2 moves within a cluster uniformly and jumps to a uniformly
/// chosen other cluster with probability `leak`. Both levels are uniform, so
/// delta = gamma = 1 while p_min = 1/clusters for P_2 = clusters.
inline TemperingInstance clustered_instance(std::size_t clusters, std::size_t size, double leak, ProposalMode mode) {
  detail::require(clusters >= 2 && size >= 1, ErrorCode::invalid_argument, "need at least two clusters");
  const std::size_t n = clusters * size;
  const auto N = detail::idx(n);
  Matrix flat = Matrix::Constant(N, N, 1.0 / static_cast<double>(n));
  Matrix local = Matrix::Zero(N, N);
  std::vector<std::size_t> labels(n);
  for (std::size_t x = 0; x < n; ++x) {
    labels[x] = x / size;
    for (std::size_t y = 0; y < n; ++y) {
      const bool same = x / size == y / size;
      const double p = same ? (1.0 - leak) / static_cast<double>(size)
                            : leak / static_cast<double>(n - size);
      local(detail::idx(x), detail::idx(y)) = p;
    }
  }
  const Vector uniform = Vector::Constant(N, 1.0 / static_cast<double>(n));
  std::vector<FiniteChain> levels{FiniteChain(flat, uniform), FiniteChain(local, uniform)};
  return {build_tempering_chain(levels, {0.5, 0.5}, mode), {Partition::whole(n), Partition(std::move(labels))}};
}

}  // namespace stlmc
