#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/estimates.hpp"
#include "stlmc/langevin.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/rng.hpp"

namespace stlmc {

enum class ProposalMode { uniform, neighbor };

inline const char* to_string(ProposalMode mode) { return mode == ProposalMode::uniform ? "uniform" : "neighbor"; }

inline ProposalMode parse_proposal_mode(const std::string& s) {
  if (s == "uniform") return ProposalMode::uniform;
  if (s == "neighbor") return ProposalMode::neighbor;
  throw Error(ErrorCode::invalid_argument, "unknown proposal mode '" + s + "' (expected uniform or neighbor)");
}

/// Inverse temperatures beta_1 < ... < beta_L = 1 with relative level
/// weights r_i. Levels are 0-based in code.
struct TemperatureLadder {
  std::vector<double> betas{1.0};
  std::vector<double> rel_weights{1.0};
  ProposalMode proposal_mode = ProposalMode::neighbor;

  std::size_t levels() const noexcept { return betas.size(); }

  /// r = min r_i / max r_i.
  double weight_ratio() const {
    const auto [lo, hi] = std::minmax_element(rel_weights.begin(), rel_weights.end());
    return *lo / *hi;
  }

  void validate() const {
    detail::require(!betas.empty(), ErrorCode::invalid_argument, "ladder needs at least one level");
    detail::require(betas.size() == rel_weights.size(), ErrorCode::invalid_argument,
                    "betas and rel_weights differ in length");
    for (std::size_t i = 0; i < betas.size(); ++i) {
      detail::require(betas[i] > 0.0 && betas[i] <= 1.0, ErrorCode::invalid_argument, "betas must lie in (0, 1]");
      if (i > 0)
        detail::require(betas[i] > betas[i - 1], ErrorCode::invalid_argument, "betas must be strictly increasing");
      detail::require(rel_weights[i] > 0.0, ErrorCode::invalid_argument, "rel_weights must be positive");
    }
    const double total = std::accumulate(rel_weights.begin(), rel_weights.end(), 0.0);
    detail::require(std::abs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument, "rel_weights must sum to 1");
  }

  /// The first `count` levels, weights renormalized.
  TemperatureLadder prefix(std::size_t count) const {
    detail::require(count >= 1 && count <= levels(), ErrorCode::invalid_argument, "prefix length out of range");
    TemperatureLadder sub;
    sub.proposal_mode = proposal_mode;
    sub.betas.assign(betas.begin(), betas.begin() + static_cast<std::ptrdiff_t>(count));
    sub.rel_weights.assign(rel_weights.begin(), rel_weights.begin() + static_cast<std::ptrdiff_t>(count));
    const double total = std::accumulate(sub.rel_weights.begin(), sub.rel_weights.end(), 0.0);
    for (double& r : sub.rel_weights) r /= total;
    return sub;
  }
};

/// Largest admissible first inverse temperature, c1 sigma^2 / D^2 (capped at 1).
inline double ladder_first_beta(const GaussianMixture& mixture, double c1) {
  const double d2 = mixture.radius() * mixture.radius();
  return d2 == 0.0 ? 1.0 : std::min(1.0, c1 * mixture.sigma2() / d2);
}

/// Maximal spacing c2 sigma^2 / (D^2 (d + ln(1/w_min))).
inline double ladder_spacing(const GaussianMixture& mixture, double c2) {
  const double d2 = mixture.radius() * mixture.radius();
  const double denom = d2 * (static_cast<double>(mixture.dim()) + std::log(1.0 / mixture.w_min()));
  return denom == 0.0 ? 1.0 : c2 * mixture.sigma2() / denom;
}

/// Arithmetic ladder from beta_1 = min(1, c1 sigma^2/D^2) in steps of
/// ladder_spacing, closed by beta_L = 1; uniform r_i.
inline TemperatureLadder make_ladder(const GaussianMixture& mixture, double c1 = 1.0, double c2 = 1.0,
                                     ProposalMode mode = ProposalMode::neighbor) {
  detail::require(c1 > 0.0 && c2 > 0.0, ErrorCode::invalid_argument, "c1 and c2 must be positive");
  TemperatureLadder ladder;
  ladder.proposal_mode = mode;
  ladder.betas.clear();
  const double first = ladder_first_beta(mixture, c1);
  const double spacing = ladder_spacing(mixture, c2);
  // Points closer than this to 1 are merged into the final level.
  constexpr double merge = 1e-12;
  for (std::size_t k = 0;; ++k) {
    const double beta = first + static_cast<double>(k) * spacing;
    if (beta >= 1.0 - merge) break;
    ladder.betas.push_back(beta);
  }
  ladder.betas.push_back(1.0);
  const double r = 1.0 / static_cast<double>(ladder.betas.size());
  ladder.rel_weights.assign(ladder.betas.size(), r);
  double total = std::accumulate(ladder.rel_weights.begin(), ladder.rel_weights.end(), 0.0);
  ladder.rel_weights.back() += 1.0 - total;
  return ladder;
}

/// Position of the chain: a point and a 0-based level index.
struct TemperingState {
  Point x;
  std::size_t level = 0;
};

/// Sampler settings shared by the tempering chain and the main algorithm.
struct RunParams {
  double eta = 0.05;
  double T = 1.0;
  std::size_t t = 200;           // tempering steps per chain run
  std::size_t m = 0;             // samples per estimation round; 0 derives it from delta
  double delta = 0.1;            // estimation failure probability
  std::uint64_t seed = 0;
  std::size_t max_retries = 1000;
  std::size_t samples = 1;       // samples returned at the final level
  std::size_t workers = 1;

  void validate(const GaussianMixture& mixture) const {
    LangevinParams{eta, T, 1.0}.validate(mixture);
    detail::require(t > 0, ErrorCode::invalid_argument, "t must be positive");
    detail::require(max_retries > 0, ErrorCode::invalid_argument, "max_retries must be positive");
    detail::require(samples > 0, ErrorCode::invalid_argument, "samples must be positive");
    detail::require(workers > 0, ErrorCode::invalid_argument, "workers must be positive");
    detail::require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0, 1)");
  }

  /// m if set, else ceil(10 L^2 log10(1/delta)), which is 10 L^2 at delta = 0.1.
  std::size_t samples_per_round(std::size_t levels) const {
    if (m > 0) return m;
    const double l2 = static_cast<double>(levels * levels);
    return static_cast<std::size_t>(std::ceil(10.0 * l2 * std::log10(1.0 / delta) - 1e-9));
  }
};

enum class MoveType : int { langevin = 1, level_swap = 2 };

struct TraceRecord {
  std::size_t step = 0;
  std::size_t level = 0;
  MoveType move = MoveType::langevin;
  bool accepted = true;
  Point x;
};

/// Per-chain counters; merged across replicas with `merge`.
struct ChainStats {
  std::size_t levels = 0;
  std::size_t steps = 0;
  std::size_t gradient_evaluations = 0;
  std::vector<std::size_t> occupancy;        // states visited per level, after each step
  std::vector<std::size_t> swaps_proposed;   // row-major levels x levels
  std::vector<std::size_t> swaps_accepted;

  explicit ChainStats(std::size_t l = 0)
      : levels(l), occupancy(l, 0), swaps_proposed(l * l, 0), swaps_accepted(l * l, 0) {}

  void merge(const ChainStats& other) {
    if (levels == 0) {
      *this = other;
      return;
    }
    detail::require(levels == other.levels, ErrorCode::invalid_argument, "cannot merge stats of different ladders");
    steps += other.steps;
    gradient_evaluations += other.gradient_evaluations;
    for (std::size_t i = 0; i < occupancy.size(); ++i) occupancy[i] += other.occupancy[i];
    for (std::size_t i = 0; i < swaps_proposed.size(); ++i) {
      swaps_proposed[i] += other.swaps_proposed[i];
      swaps_accepted[i] += other.swaps_accepted[i];
    }
  }

  double acceptance_rate(std::size_t from, std::size_t to) const {
    const std::size_t n = swaps_proposed[from * levels + to];
    return n == 0 ? 0.0 : static_cast<double>(swaps_accepted[from * levels + to]) / static_cast<double>(n);
  }
};

/// min{ (r_k' e^{-beta_k' f} / Z^_k') / (r_k e^{-beta_k f} / Z^_k), 1 }, in log
/// domain. With the uniform weights make_ladder produces, the r factors cancel.
inline double type2_accept_prob(double f_x, std::size_t k, std::size_t k_prime, const TemperatureLadder& ladder,
                                const PartitionEstimates& zhat) {
  if (k == k_prime) return 1.0;
  const double log_ratio = (ladder.betas[k] - ladder.betas[k_prime]) * f_x + zhat.log_zhat[k] -
                           zhat.log_zhat[k_prime] + std::log(ladder.rel_weights[k_prime]) -
                           std::log(ladder.rel_weights[k]);
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

namespace detail {

struct ChainWorkspace {
  Point noise;
  Point grad;
  explicit ChainWorkspace(std::size_t d) : noise(d), grad(d) {}
};

/// Level proposal for a Type 2 move; returns k itself for a stay.
inline std::size_t propose_level(std::size_t k, std::size_t levels, ProposalMode mode, Rng& rng) {
  if (mode == ProposalMode::uniform) return rng.index(levels);
  const bool down = rng.uniform() < 0.5;
  if (down) return k == 0 ? k : k - 1;
  return k + 1 >= levels ? k : k + 1;
}

template <Target T>
void tempering_step_inplace(TemperingState& state, const T& target, const TemperatureLadder& ladder,
                            const PartitionEstimates& zhat, double eta, double time, Rng& rng,
                            ChainWorkspace& work, ChainStats& stats, std::vector<TraceRecord>* trace) {
  const std::size_t levels = ladder.levels();
  MoveType move;
  bool accepted = true;
  if (rng.uniform() < 0.5) {
    move = MoveType::langevin;
    const LangevinParams params{eta, time, ladder.betas[state.level]};
    macro_step_inplace(target, params, state.x, rng, work.noise, work.grad);
    stats.gradient_evaluations += params.steps_per_macro();
  } else {
    move = MoveType::level_swap;
    const std::size_t proposal = propose_level(state.level, levels, ladder.proposal_mode, rng);
    if (proposal != state.level) {
      const double f_x = target.value(state.x);
      const double a = type2_accept_prob(f_x, state.level, proposal, ladder, zhat);
      accepted = rng.uniform() < a;
      stats.swaps_proposed[state.level * levels + proposal] += 1;
      if (accepted) {
        stats.swaps_accepted[state.level * levels + proposal] += 1;
        state.level = proposal;
      }
    }
  }
  stats.occupancy[state.level] += 1;
  stats.steps += 1;
  if (trace != nullptr) trace->push_back({stats.steps, state.level, move, accepted, state.x});
}

template <Target T>
void check_chain_inputs(const T& target, const TemperatureLadder& ladder, const PartitionEstimates& zhat) {
  ladder.validate();
  zhat.validate();
  require(zhat.size() >= ladder.levels(), ErrorCode::invalid_argument,
          "partition estimates cover fewer levels than the ladder");
  (void)target;
}

}  // namespace detail

/// One step of the simulated tempering chain: with probability 1/2 a Langevin
/// macro-step at the current level, otherwise a Metropolis level move.
template <Target T>
TemperingState tempering_step(const TemperingState& state, const T& target, const TemperatureLadder& ladder,
                              const PartitionEstimates& zhat, const RunParams& params, Rng& rng) {
  detail::check_chain_inputs(target, ladder, zhat);
  detail::check_point(target, state.x);
  detail::require(state.level < ladder.levels(), ErrorCode::invalid_argument, "state level out of range");
  TemperingState next = state;
  detail::ChainWorkspace work(target.dim());
  ChainStats stats(ladder.levels());
  detail::tempering_step_inplace(next, target, ladder, zhat, params.eta, params.T, rng, work, stats, nullptr);
  return next;
}

struct StlmcResult {
  Point sample;
  std::size_t attempts = 0;
  std::vector<std::size_t> final_level_histogram;
  ChainStats stats;
  std::vector<TraceRecord> trace;
};

/// Draws x_0 ~ N(0, sigma^2/beta_1 I) at level 1, runs t tempering steps, and
/// returns x when the chain ends on the last level; otherwise re-runs from a
/// fresh start, up to max_retries attempts.
template <Target T>
StlmcResult run_stlmc(const T& target, const TemperatureLadder& ladder, const PartitionEstimates& zhat,
                      const RunParams& params, Rng& rng, bool record_trace = false) {
  detail::check_chain_inputs(target, ladder, zhat);
  const std::size_t levels = ladder.levels();
  const std::size_t d = target.dim();
  const double init_sd = std::sqrt(target.mixture().sigma2() / ladder.betas.front());

  StlmcResult result;
  result.stats = ChainStats(levels);
  result.final_level_histogram.assign(levels, 0);
  detail::ChainWorkspace work(d);
  std::vector<TraceRecord>* trace = record_trace ? &result.trace : nullptr;

  TemperingState state;
  state.x.resize(d);
  for (std::size_t attempt = 1; attempt <= params.max_retries; ++attempt) {
    for (double& v : state.x) v = init_sd * rng.normal();
    state.level = 0;
    for (std::size_t s = 0; s < params.t; ++s)
      detail::tempering_step_inplace(state, target, ladder, zhat, params.eta, params.T, rng, work, result.stats, trace);
    result.attempts = attempt;
    result.final_level_histogram[state.level] += 1;
    if (state.level + 1 == levels) {
      result.sample = state.x;
      return result;
    }
  }
  throw RetriesExhaustedError("tempering chain did not finish on level " + std::to_string(levels) + " in " +
                                  std::to_string(params.max_retries) + " attempts",
                              params.max_retries, result.final_level_histogram, levels);
}

}  // namespace stlmc
