#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stlmc/stlmc.hpp"

using namespace stlmc;

namespace {

GaussianMixture desk() { return GaussianMixture({0.5, 0.5}, {{-3.0}, {3.0}}, 1.0); }

PartitionEstimates exact_estimates(const GaussianMixture& m, const TemperatureLadder& ladder) {
  std::vector<double> lz;
  for (double b : ladder.betas) lz.push_back(log_partition_function(m, b));
  return PartitionEstimates::anchored(lz);
}

}  // namespace

TEST(Ladder, SingleCenteredGaussian) {
  const TemperatureLadder l = make_ladder(GaussianMixture({1.0}, {{0.0}}, 1.0), 1.0, 1.0);
  EXPECT_EQ(l.betas, std::vector<double>{1.0});
  EXPECT_EQ(l.levels(), 1u);
}

TEST(Ladder, DeskArithmetic) {
  const TemperatureLadder l = make_ladder(desk(), 1.0, 1.0);
  const double first = 1.0 / 9.0;
  const double spacing = 1.0 / (9.0 * (1.0 + std::log(2.0)));
  EXPECT_NEAR(l.betas.front(), first, 1e-15);
  EXPECT_NEAR(l.betas[1] - l.betas[0], spacing, 1e-15);
  EXPECT_NEAR(spacing, 0.0656, 5e-5);
  // Levels first + k spacing below 1, then 1 itself.
  const auto below = static_cast<std::size_t>(std::floor((1.0 - first) / spacing)) + 1;
  EXPECT_EQ(l.levels(), below + 1);
  EXPECT_EQ(l.levels(), 15u);
  EXPECT_EQ(l.betas.back(), 1.0);
  double total = 0.0;
  for (double r : l.rel_weights) total += r;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Ladder, InvariantsOnRandomMixtures) {
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng = Rng::stream(1, 0, k);
    const GaussianMixture m = random_mixture(rng);
    const TemperatureLadder l = make_ladder(m, 1.0, 1.0);
    EXPECT_NO_THROW(l.validate());
    EXPECT_EQ(l.betas.back(), 1.0);
    EXPECT_LE(l.betas.front(), std::min(1.0, m.sigma2() / (m.radius() * m.radius())) * (1 + 1e-12));
    const double spacing = m.sigma2() / (m.radius() * m.radius() * (m.dim() + std::log(1.0 / m.w_min())));
    for (std::size_t i = 1; i < l.levels(); ++i) {
      EXPECT_GT(l.betas[i], l.betas[i - 1]);
      EXPECT_LE(l.betas[i] - l.betas[i - 1], spacing * (1 + 1e-12));
    }
  }
}

TEST(Ladder, PrefixRenormalizes) {
  const TemperatureLadder l = make_ladder(desk(), 1.0, 1.0);
  const TemperatureLadder p = l.prefix(4);
  EXPECT_EQ(p.levels(), 4u);
  for (double r : p.rel_weights) EXPECT_NEAR(r, 0.25, 1e-15);
  EXPECT_THROW(l.prefix(0), Error);
  EXPECT_THROW(l.prefix(16), Error);
}

TEST(TypeTwo, AcceptanceExamples) {
  TemperatureLadder l;
  l.betas = {0.5, 1.0};
  l.rel_weights = {0.5, 0.5};
  PartitionEstimates z;
  z.log_zhat = {0.0, 0.0};
  EXPECT_EQ(type2_accept_prob(3.0, 1, 1, l, z), 1.0);
  EXPECT_EQ(type2_accept_prob(0.0, 0, 1, l, z), 1.0);
  EXPECT_NEAR(type2_accept_prob(2.0, 0, 1, l, z), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(type2_accept_prob(2.0, 0, 1, l, z), 0.36788, 5e-6);
  EXPECT_EQ(type2_accept_prob(2.0, 1, 0, l, z), 1.0);
}

TEST(TypeTwo, DetailedBalanceIdentity) {
  Rng rng(8);
  for (int k = 0; k < 1000; ++k) {
    TemperatureLadder l;
    l.betas = {0.2 + 0.3 * rng.uniform(), 0.6 + 0.4 * rng.uniform()};
    l.rel_weights = random_weights(2, rng);
    PartitionEstimates z;
    z.log_zhat = {0.0, rng.normal()};
    const double f = 5.0 * rng.uniform();
    auto mass = [&](std::size_t i) { return l.rel_weights[i] * std::exp(-l.betas[i] * f - z.log_zhat[i]); };
    EXPECT_NEAR(mass(0) * type2_accept_prob(f, 0, 1, l, z), mass(1) * type2_accept_prob(f, 1, 0, l, z),
                1e-12 * mass(0));
  }
}

TEST(Tempering, SingleLevelNeverMovesLevel) {
  const GaussianMixture m = desk();
  TemperatureLadder l;
  const PartitionEstimates z;
  Rng rng(2);
  RunParams p;
  TemperingState s{{0.0}, 0};
  for (int k = 0; k < 50; ++k) {
    s = tempering_step(s, m, l, z, p, rng);
    EXPECT_EQ(s.level, 0u);
  }
  p.t = 10;
  const StlmcResult r = run_stlmc(m, l, z, p, rng);
  EXPECT_EQ(r.attempts, 1u);
}

TEST(Tempering, FrozenLevelMoveProbability) {
  // At x = 0 of a centered unit Gaussian f = 0, so every proposed level move is
  // accepted; under the neighbor proposal a step moves level with probability
  // 1/2 (level move) x 1/2 (proposal points to the other level) = 1/4.
  const GaussianMixture m({1.0}, {{0.0}}, 1.0);
  TemperatureLadder l;
  l.betas = {0.5, 1.0};
  l.rel_weights = {0.5, 0.5};
  PartitionEstimates z;
  z.log_zhat = {0.0, 0.0};
  RunParams p;
  Rng rng(12);
  const int n = 40000;
  for (std::size_t from : {0u, 1u}) {
    int moved = 0;
    for (int k = 0; k < n; ++k)
      if (tempering_step(TemperingState{{0.0}, from}, m, l, z, p, rng).level != from) ++moved;
    const double se = std::sqrt(0.25 * 0.75 / n);
    EXPECT_NEAR(static_cast<double>(moved) / n, 0.25, 3.0 * se) << "from level " << from;
  }
}

TEST(Tempering, LevelOccupancyWithExactNormalizers) {
  const GaussianMixture m = desk();
  const TemperatureLadder l = make_ladder(m, 1.0, 1.0);
  const PartitionEstimates z = exact_estimates(m, l);
  Rng rng(1);
  TemperingState s{{0.0}, 0};
  detail::ChainWorkspace work(1);
  ChainStats burn(l.levels()), stats(l.levels());
  for (int k = 0; k < 10000; ++k) detail::tempering_step_inplace(s, m, l, z, 0.05, 1.0, rng, work, burn, nullptr);
  for (int k = 0; k < 1000000; ++k) detail::tempering_step_inplace(s, m, l, z, 0.05, 1.0, rng, work, stats, nullptr);
  for (std::size_t i = 0; i < l.levels(); ++i) {
    const double occ = static_cast<double>(stats.occupancy[i]) / static_cast<double>(stats.steps);
    EXPECT_NEAR(occ / l.rel_weights[i], 1.0, 0.05) << "level " << i + 1;
  }
}

TEST(Tempering, RunStlmcReturnsOnlyFinalLevelEndpoints) {
  const GaussianMixture m = desk();
  const TemperatureLadder l = make_ladder(m, 1.0, 1.0).prefix(3);
  const PartitionEstimates z = exact_estimates(m, l);
  RunParams p;
  p.t = 20;
  Rng rng(4);
  const StlmcResult r = run_stlmc(m, l, z, p, rng, true);
  EXPECT_EQ(r.trace.size(), r.attempts * p.t);
  EXPECT_EQ(r.trace.back().level, 2u);
  EXPECT_EQ(r.trace.back().x, r.sample);
  std::size_t total = 0;
  for (auto c : r.final_level_histogram) total += c;
  EXPECT_EQ(total, r.attempts);
  EXPECT_EQ(r.final_level_histogram[2], 1u);
}

TEST(Tempering, RetriesExhaustedCarriesHistogram) {
  const GaussianMixture m = desk();
  const TemperatureLadder l = make_ladder(m, 1.0, 1.0);
  PartitionEstimates z;
  z.log_zhat.assign(l.levels(), 0.0);
  // Wildly wrong normalizers pin the chain to the hottest level.
  for (std::size_t i = 1; i < l.levels(); ++i) z.log_zhat[i] = -200.0;
  RunParams p;
  p.t = 4;
  p.max_retries = 5;
  Rng rng(5);
  try {
    run_stlmc(m, l, z, p, rng);
    FAIL() << "expected retries to run out";
  } catch (const RetriesExhaustedError& e) {
    EXPECT_EQ(e.attempts(), 5u);
    std::size_t total = 0;
    for (auto c : e.final_level_histogram()) total += c;
    EXPECT_EQ(total, 5u);
  }
}

TEST(Tempering, ReturnedSamplesMatchFinalLevelEndpoints) {
  // An attempt is returned exactly when it ends on level L, so the returned
  // samples are the level-L slice of all attempts' endpoints.
  const GaussianMixture m = desk();
  const TemperatureLadder l = make_ladder(m, 1.0, 1.0).prefix(4);
  const PartitionEstimates z = exact_estimates(m, l);
  RunParams p;
  p.t = 30;
  Rng rng(6);
  std::vector<double> returned, endpoints;
  for (int k = 0; k < 1500; ++k) {
    const StlmcResult r = run_stlmc(m, l, z, p, rng, true);
    returned.push_back(r.sample[0]);
    for (std::size_t a = 0; a < r.attempts; ++a) {
      const TraceRecord& rec = r.trace[(a + 1) * p.t - 1];
      if (rec.level + 1 == l.levels()) endpoints.push_back(rec.x[0]);
    }
  }
  EXPECT_EQ(returned, endpoints);
}
