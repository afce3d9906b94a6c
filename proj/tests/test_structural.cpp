#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stlmc/stlmc.hpp"

using namespace stlmc;

namespace {

GaussianMixture symmetric(double mu) { return GaussianMixture({0.5, 0.5}, {{-mu}, {mu}}, 1.0); }

std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return xs;
}

}  // namespace

TEST(ZRatio, EqualTemperaturesGiveOne) {
  const ZRatioCheck c = z_ratio_bound_check(symmetric(3.0), 0.4, 0.4);
  EXPECT_DOUBLE_EQ(c.ratio, 1.0);
  EXPECT_DOUBLE_EQ(c.lower_bound, 0.5);
  EXPECT_TRUE(c.holds());
}

TEST(ZRatio, LowerBoundFormula) {
  const GaussianMixture m({0.25, 0.75}, {{-2.0}, {2.0}}, 4.0);
  // D / sigma = 1, sqrt d = 1, ln(2 / w_min) = ln 8.
  const double reach = 1.0 + (1.0 + std::sqrt(std::log(8.0))) / std::sqrt(0.5);
  EXPECT_NEAR(z_ratio_lower_bound(m, 0.5, 0.75), 0.5 * std::exp(-2.0 * 0.25 * reach * reach), 1e-15);
}

TEST(ZRatio, GaussianClosedForm) {
  // Z_beta = sqrt(2 pi / beta) for f = x^2 / 2.
  const GaussianMixture g({1.0}, {{0.0}}, 1.0);
  const ZRatioCheck c = z_ratio_bound_check(g, 0.25, 1.0);
  EXPECT_NEAR(c.ratio, 0.5, 1e-7);
  EXPECT_TRUE(c.holds());
}

TEST(ZRatio, AdjacentLadderLevels) {
  for (double mu : {1.0, 3.0}) {
    const GaussianMixture m = symmetric(mu);
    const TemperatureLadder ladder = make_ladder(m);
    for (std::size_t i = 0; i + 1 < ladder.levels(); ++i) {
      const ZRatioCheck c = z_ratio_bound_check(m, ladder.betas[i], ladder.betas[i + 1]);
      EXPECT_TRUE(c.holds()) << "level " << i;
      EXPECT_LT(c.ratio, 1.0);
    }
  }
  EXPECT_THROW(z_ratio_bound_check(symmetric(1.0), 0.8, 0.5), Error);
}

TEST(Sce, StronglyConvexInputIsUnchanged) {
  const auto xs = grid(-5.0, 5.0, 201);
  std::vector<double> fs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = 0.5 * xs[i] * xs[i];
  const auto env = sce_envelope_1d(xs, fs, 0.5);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(env[i], fs[i], 1e-12);
}

TEST(Sce, SymmetricDoubleWellGap) {
  for (double mu : {1.0, 3.0}) {
    const GaussianMixture m = symmetric(mu);
    const auto xs = grid(-10.0, 10.0, 10001);
    std::vector<double> fs(xs.size());
    double g_min = INFINITY;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      fs[i] = m.value(std::span<const double>(&xs[i], 1));
      g_min = std::min(g_min, fs[i] - 0.25 * xs[i] * xs[i]);
    }
    const auto env = sce_envelope_1d(xs, fs, 0.5);
    double gap = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      EXPECT_LE(env[i], fs[i] + 1e-12);
      gap = std::max(gap, fs[i] - env[i]);
    }
    // f - x^2/4 is symmetric with its hull flat between the two minima, so the
    // gap is attained at 0 and equals g(0) - min g.
    const double g0 = m.value(Point{0.0});
    EXPECT_NEAR(gap, g0 - g_min, 1e-9);
    EXPECT_LE(gap, mu * mu);
    // Strong convexity: second differences of env - x^2/4 are nonnegative.
    const double h = xs[1] - xs[0];
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      const double d2 = env[i + 1] - 2.0 * env[i] + env[i - 1];
      EXPECT_GE(d2, 0.5 * h * h - 1e-9);
    }
  }
}

TEST(Sce, RejectsBadGrids) {
  const auto xs = grid(-1.0, 1.0, 20);
  const std::vector<double> fs(20, 0.0);
  EXPECT_THROW(sce_envelope_1d(xs, fs, 0.5), Error);
  auto wide = grid(-1.0, 1.0, 60);
  const std::vector<double> f60(60, 0.0);
  EXPECT_THROW(sce_envelope_1d(wide, f60, 0.0), Error);
  wide[30] += 1e-3;
  EXPECT_THROW(sce_envelope_1d(wide, f60, 0.5), Error);
}

TEST(Drift, SecondMomentBudget) {
  const GaussianMixture m = symmetric(3.0);
  const Point x_star = locate_min(m);
  for (double beta : {0.1, 1.0}) {
    const LangevinParams p{.eta = 0.01, .T = 1.0, .beta = beta};
    const DriftCheck c = drift_check(m, p, x_star, 1000, 11);
    EXPECT_TRUE(c.holds()) << "beta " << beta << ": " << c.end_mean << " vs " << c.start_mean + c.budget;
    EXPECT_DOUBLE_EQ(c.budget, (4.0 * beta * 9.0 + 2.0) * 1.0);
  }
}
