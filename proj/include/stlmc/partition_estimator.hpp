#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "stlmc/error.hpp"
#include "stlmc/estimates.hpp"
#include "stlmc/exact_sampler.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/quadrature.hpp"
#include "stlmc/rng.hpp"
#include "stlmc/tempering.hpp"

namespace stlmc {

/// log Z^_{l+1} = log Z^_l + log mean_j exp((beta_l - beta_next) f(x_j)).
/// The increment is at most (beta_next - beta_l) * sup|f - f_tilde|, which is 0
/// for an exact mixture since f >= 0; this is checked on every call.
template <Target T>
double estimate_next_z(std::span<const Point> samples, const T& target, double beta_l, double beta_next,
                       double log_zhat_l) {
  detail::require(!samples.empty(), ErrorCode::invalid_argument, "estimate_next_z needs at least one sample");
  detail::require(beta_next >= beta_l, ErrorCode::invalid_argument, "beta_next must not be below beta_l");
  detail::require(std::isfinite(log_zhat_l), ErrorCode::non_finite, "log Z^_l must be finite");
  const double dbeta = beta_l - beta_next;
  std::vector<double> terms(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    detail::check_point(target, samples[j]);
    terms[j] = dbeta * target.value(samples[j]);
  }
  const double increment = detail::log_sum_exp(terms) - std::log(static_cast<double>(samples.size()));
  const double ceiling = (beta_next - beta_l) * target.perturbation_bound();
  detail::require(increment <= ceiling + 1e-12, ErrorCode::non_finite,
                  "partition ratio factor exceeds its bound; f is below its certified minimum");
  return log_zhat_l + increment;
}

namespace detail {

/// Calls body(i) for i in [0, count) on up to `workers` threads. Exceptions are
/// collected per index and the lowest-index one is rethrown, so failures do
/// not depend on scheduling.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t w, std::size_t stride) {
    for (std::size_t i = w; i < count; i += stride) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, count));
  if (n == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(run, w, n);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Samples from one round of replicas plus their merged counters.
struct ReplicaBatch {
  std::vector<Point> samples;
  ChainStats stats;
  std::size_t attempts = 0;
  std::vector<std::size_t> final_level_histogram;
};

/// `count` independent runs of the tempering chain; replica j uses the RNG
/// stream (seed, family, j). Output order is by replica index.
template <Target T>
ReplicaBatch draw_samples(const T& target, const TemperatureLadder& ladder, const PartitionEstimates& zhat,
                          const RunParams& params, std::size_t count, std::uint64_t family) {
  std::vector<StlmcResult> results(count);
  detail::parallel_for(count, params.workers, [&](std::size_t j) {
    Rng rng = Rng::stream(params.seed, family, j);
    results[j] = run_stlmc(target, ladder, zhat, params, rng);
  });
  ReplicaBatch batch;
  batch.stats = ChainStats(ladder.levels());
  batch.final_level_histogram.assign(ladder.levels(), 0);
  batch.samples.reserve(count);
  for (auto& r : results) {
    batch.samples.push_back(std::move(r.sample));
    batch.stats.merge(r.stats);
    batch.attempts += r.attempts;
    for (std::size_t k = 0; k < r.final_level_histogram.size(); ++k)
      batch.final_level_histogram[k] += r.final_level_histogram[k];
  }
  return batch;
}

struct EstimationResult {
  TemperatureLadder ladder;
  PartitionEstimates estimates;
  std::vector<ChainStats> round_stats;   // round l (1-based) runs the first l levels
  std::size_t gradient_evaluations = 0;
  std::size_t attempts = 0;
};

namespace detail {

template <Target T>
ReplicaBatch run_round(const T& target, const TemperatureLadder& ladder, const PartitionEstimates& zhat,
                       const RunParams& params, std::size_t l, std::size_t count) {
  const TemperatureLadder sub = ladder.prefix(l);
  try {
    return draw_samples(target, sub, zhat, params, count, l);
  } catch (const RetriesExhaustedError& e) {
    throw RetriesExhaustedError("round with " + std::to_string(l) + " levels failed: " + e.what(), e.attempts(),
                                e.final_level_histogram(), l);
  }
}

}  // namespace detail

/// Rounds l = 1..L-1: draw m samples with the first l levels and set
/// log Z^_{l+1} from them. Round l uses RNG family l.
template <Target T>
EstimationResult estimate_partition_functions(const T& target, const TemperatureLadder& ladder,
                                              const RunParams& params) {
  params.validate(target.mixture());
  ladder.validate();
  const std::size_t levels = ladder.levels();
  const std::size_t m = params.samples_per_round(levels);
  EstimationResult out;
  out.ladder = ladder;
  out.estimates.log_zhat.assign(1, 0.0);
  for (std::size_t l = 1; l < levels; ++l) {
    ReplicaBatch batch = detail::run_round(target, ladder, out.estimates, params, l, m);
    out.gradient_evaluations += batch.stats.gradient_evaluations;
    out.attempts += batch.attempts;
    out.round_stats.push_back(batch.stats);
    out.estimates.log_zhat.push_back(estimate_next_z(std::span<const Point>(batch.samples), target,
                                                     ladder.betas[l - 1], ladder.betas[l],
                                                     out.estimates.log_zhat.back()));
  }
  return out;
}

struct MainResult {
  TemperatureLadder ladder;
  PartitionEstimates estimates;
  std::vector<Point> samples;
  ChainStats final_stats;                 // counters of the last round only
  std::vector<ChainStats> round_stats;    // one entry per round, round l has l levels
  std::size_t gradient_evaluations = 0;   // all rounds
  std::size_t attempts = 0;               // all rounds
  std::vector<std::size_t> final_level_histogram;  // last round
};

/// Last round: params.samples draws with all L levels, RNG family L. Given the
/// same estimates this reproduces the last round of run_main_algorithm.
template <Target T>
MainResult sample_with_estimates(const T& target, const TemperatureLadder& ladder, const PartitionEstimates& zhat,
                                 const RunParams& params) {
  params.validate(target.mixture());
  ladder.validate();
  zhat.validate();
  detail::require(zhat.size() == ladder.levels(), ErrorCode::invalid_argument,
                  "estimates must cover every ladder level");
  ReplicaBatch batch = detail::run_round(target, ladder, zhat, params, ladder.levels(), params.samples);
  MainResult out;
  out.ladder = ladder;
  out.estimates = zhat;
  out.samples = std::move(batch.samples);
  out.gradient_evaluations = batch.stats.gradient_evaluations;
  out.attempts = batch.attempts;
  out.round_stats.push_back(batch.stats);
  out.final_stats = std::move(batch.stats);
  out.final_level_histogram = std::move(batch.final_level_histogram);
  return out;
}

/// The main algorithm on a given ladder: estimation rounds, then the final
/// round at all L levels.
template <Target T>
MainResult run_main_algorithm(const T& target, const TemperatureLadder& ladder, const RunParams& params) {
  EstimationResult est = estimate_partition_functions(target, ladder, params);
  MainResult out = sample_with_estimates(target, ladder, est.estimates, params);
  est.round_stats.push_back(out.final_stats);
  out.round_stats = std::move(est.round_stats);
  out.gradient_evaluations += est.gradient_evaluations;
  out.attempts += est.attempts;
  return out;
}

/// Builds the ladder with make_ladder(c1, c2, mode) and runs the main algorithm.
template <Target T>
MainResult run_main_algorithm(const T& target, const RunParams& params, double c1 = 1.0, double c2 = 1.0,
                              ProposalMode mode = ProposalMode::neighbor) {
  return run_main_algorithm(target, make_ladder(target.mixture(), c1, c2, mode), params);
}

struct ConcentrationResult {
  std::size_t n = 0;
  std::size_t trials = 0;
  double epsilon = 0.0;
  double C = 0.0;
  double failure_rate = 0.0;
  double envelope = 0.0;        // exp(-n eps^2 / (2 C^4))
  double standard_error = 0.0;  // binomial SE of failure_rate
  bool holds() const { return failure_rate <= envelope + 3.0 * standard_error; }
};

/// Repeats the ratio estimator r_bar = (1/n) sum_i ratio(x_i) over `trials`
/// trials and reports how often |r_bar / r - 1| > epsilon. `draw_ratio`
/// returns g_2(x)/g_1(x) for a fresh x ~ p_1; trial k uses stream (seed, 0, k).
inline ConcentrationResult concentration_check(std::size_t n, double epsilon, double C, double true_ratio,
                                               const std::function<double(Rng&)>& draw_ratio, std::size_t trials,
                                               std::uint64_t seed) {
  detail::require(n > 0 && trials > 0, ErrorCode::invalid_argument, "n and trials must be positive");
  detail::require(epsilon > 0.0 && C > 0.0 && true_ratio > 0.0, ErrorCode::invalid_argument,
                  "epsilon, C and the true ratio must be positive");
  std::size_t failures = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng = Rng::stream(seed, 0, k);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += draw_ratio(rng);
    const double r_bar = sum / static_cast<double>(n);
    if (std::abs(r_bar / true_ratio - 1.0) > epsilon) ++failures;
  }
  ConcentrationResult out;
  out.n = n;
  out.trials = trials;
  out.epsilon = epsilon;
  out.C = C;
  out.failure_rate = static_cast<double>(failures) / static_cast<double>(trials);
  out.envelope = std::exp(-static_cast<double>(n) * epsilon * epsilon / (2.0 * std::pow(C, 4)));
  out.standard_error = std::sqrt(out.failure_rate * (1.0 - out.failure_rate) / static_cast<double>(trials));
  return out;
}

/// Adjacent-level instance: x ~ p_{beta_1} exactly, ratio e^{-(beta_2 - beta_1) f(x)},
/// true ratio Z_{beta_2}/Z_{beta_1} by quadrature (d <= 2), and C = max(1, 1/r).
template <Target T>
ConcentrationResult concentration_check(const T& target, double beta_1, double beta_2, std::size_t n,
                                        double epsilon, std::size_t trials, std::uint64_t seed) {
  detail::require(beta_2 >= beta_1, ErrorCode::invalid_argument, "beta_2 must not be below beta_1");
  const double r = std::exp(log_partition_function(target, beta_2) - log_partition_function(target, beta_1));
  const double sup_ratio = std::exp((beta_2 - beta_1) * target.perturbation_bound());
  const double C = std::max({1.0, 1.0 / r, sup_ratio});
  auto draw = [&](Rng& rng) {
    const Point x = sample_exact(target, beta_1, rng);
    return std::exp(-(beta_2 - beta_1) * target.value(x));
  };
  return concentration_check(n, epsilon, C, r, draw, trials, seed);
}

}  // namespace stlmc
