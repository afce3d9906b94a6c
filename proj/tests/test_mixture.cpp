#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stlmc/stlmc.hpp"

using namespace stlmc;

namespace {

GaussianMixture single(double mu = 0.0, double sigma2 = 1.0) { return GaussianMixture({1.0}, {{mu}}, sigma2); }
GaussianMixture pair(double mu) { return GaussianMixture({0.5, 0.5}, {{-mu}, {mu}}, 1.0); }

}  // namespace

TEST(Mixture, ValueExamples) {
  EXPECT_DOUBLE_EQ(log_density_negf(single(), Point{0.0}), 0.0);
  EXPECT_DOUBLE_EQ(log_density_negf(single(), Point{2.0}), 2.0);
  // -ln(1/2 e^{-1/2} + 1/2 e^{-1/2})
  const double oracle = -std::log(0.5 * std::exp(-0.5) + 0.5 * std::exp(-0.5));
  EXPECT_NEAR(log_density_negf(pair(1.0), Point{0.0}), oracle, 1e-15);
  EXPECT_NEAR(oracle, 0.5, 1e-15);
}

TEST(Mixture, DerivedScales) {
  const GaussianMixture m({0.2, 0.3, 0.5}, {{3.0, 4.0}, {-1.0, 0.0}, {0.0, 2.0}}, 2.0);
  EXPECT_DOUBLE_EQ(m.radius(), 5.0);
  EXPECT_DOUBLE_EQ(m.w_min(), 0.2);
  EXPECT_EQ(m.dim(), 2u);
  EXPECT_EQ(m.components(), 3u);
}

TEST(Mixture, ValueIsNonnegativeAndStableFarAway) {
  const GaussianMixture m({0.3, 0.7}, {{-1.0}, {2.0}}, 1.0);
  for (double x : {-1e4, -50.0, 0.0, 3.0, 1e4}) {
    const double f = m.value(Point{x});
    EXPECT_TRUE(std::isfinite(f));
    EXPECT_GE(f, 0.0);
  }
  // Far from both means the nearer component dominates: f ~ (x - 2)^2 / 2 - ln 0.7.
  EXPECT_NEAR(m.value(Point{1e4}), 0.5 * (1e4 - 2.0) * (1e4 - 2.0) - std::log(0.7), 1e-6);
}

TEST(Mixture, RejectsInvalidParameters) {
  EXPECT_THROW(GaussianMixture({0.5, 0.6}, {{0.0}, {1.0}}, 1.0), Error);
  EXPECT_THROW(GaussianMixture({1.0}, {{0.0}}, 0.0), Error);
  EXPECT_THROW(GaussianMixture({0.5, 0.5}, {{0.0}, {1.0, 2.0}}, 1.0), Error);
  EXPECT_THROW(GaussianMixture({1.0, 0.0}, {{0.0}, {1.0}}, 1.0), Error);
  EXPECT_THROW(GaussianMixture({}, {}, 1.0), Error);
  EXPECT_THROW(log_density_negf(single(), Point{0.0, 1.0}), Error);
  EXPECT_THROW(log_density_negf(single(), Point{std::nan("")}), Error);
}

TEST(Mixture, GradientExamples) {
  EXPECT_DOUBLE_EQ(grad_f(single(), Point{2.0})[0], 2.0);
  EXPECT_DOUBLE_EQ(grad_f(pair(1.0), Point{0.0})[0], 0.0);
  const GaussianMixture m({0.3, 0.7}, {{-1.0}, {2.0}}, 1.0);
  const double h = 1e-5;
  const double fd = (m.value(Point{0.5 + h}) - m.value(Point{0.5 - h})) / (2.0 * h);
  EXPECT_NEAR(grad_f(m, Point{0.5})[0], fd, 1e-8);
}

TEST(Mixture, LocateMinExamples) {
  const GaussianMixture m1({1.0}, {{3.0, 0.0}}, 1.0);
  const Point x1 = locate_min(m1);
  EXPECT_NEAR(x1[0], 3.0, 1e-7);
  EXPECT_NEAR(x1[1], 0.0, 1e-7);

  EXPECT_LE(std::abs(locate_min(pair(1.0))[0]), std::sqrt(2.0));

  const GaussianMixture m({0.3, 0.7}, {{-2.0}, {2.0}}, 1.0);
  double best_x = 0.0, best_f = INFINITY;
  const int n = 100000;
  for (int i = 0; i <= n; ++i) {
    const double x = -4.0 + 8.0 * i / n;
    const double f = m.value(Point{x});
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  const double spacing = 8.0 / n;
  EXPECT_NEAR(locate_min(m)[0], best_x, spacing);
  EXPECT_GT(best_x, 1.9);
}

TEST(Mixture, HessianExamples) {
  for (double x : {-3.0, 0.0, 0.7, 5.0}) {
    EXPECT_NEAR(hessian_max_eig(single(), Point{x}), 1.0, 1e-6);
    EXPECT_NEAR(hessian_max_eig(single(0.0, 4.0), Point{x}), 0.25, 1e-6);
  }
  const GaussianMixture m({0.4, 0.6}, {{-1.5}, {2.0}}, 1.0);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) worst = std::max(worst, hessian_max_eig(m, Point{-5.0 + 0.01 * i}));
  EXPECT_LE(worst, 2.0);
}

TEST(Mixture, CloseToSumRatioExamples) {
  const GaussianMixture m = pair(1.0);
  for (double x : {-2.0, 0.0, 0.3}) EXPECT_NEAR(close_to_sum_ratio(m, 1.0, Point{x}), 1.0, 1e-14);
  for (double beta : {0.1, 0.5, 1.0}) EXPECT_NEAR(close_to_sum_ratio(single(1.0), beta, Point{0.4}), 1.0, 1e-14);
  const double r = close_to_sum_ratio(m, 0.5, Point{0.0});
  EXPECT_GE(r, 1.0);
  EXPECT_LE(r, 2.0);
  // At the symmetry point both components agree, so the ratio is 1 exactly.
  EXPECT_NEAR(r, 1.0, 1e-14);
  const double r2 = close_to_sum_ratio(pair(3.0), 0.5, Point{3.0});
  EXPECT_GT(r2, 1.0);
  EXPECT_LE(r2, 2.0);
}

TEST(Mixture, GrowthBoundCorrectForm) {
  // A single Gaussian at 3 evaluated at 10 has f = 24.5, below (|x|^2 - D^2)/2 = 45.5:
  // the looser form fails, the (|x| - D)_+^2 / 2 form holds.
  const GaussianMixture m = single(3.0);
  EXPECT_DOUBLE_EQ(m.value(Point{10.0}), 24.5);
  EXPECT_LT(m.value(Point{10.0}), (100.0 - 9.0) / 2.0);
  EXPECT_GE(m.value(Point{10.0}), (10.0 - 3.0) * (10.0 - 3.0) / 2.0 - 1e-12);
}

TEST(Perturbation, DeclaredBounds) {
  const Perturbation p = sine_perturbation(0.2, 0.5, 4);
  EXPECT_DOUBLE_EQ(p.sup_bound, 0.2);
  EXPECT_DOUBLE_EQ(p.grad_bound, 0.2 * 2.0 / 0.5);
  const PerturbedTarget t(pair(3.0), sine_perturbation(0.2, 1.0, 1));
  EXPECT_DOUBLE_EQ(t.perturbation_bound(), 0.2);
  EXPECT_NEAR(t.value(Point{1.0}) - pair(3.0).value(Point{1.0}), 0.2 * std::sin(1.0), 1e-15);
  const double h = 1e-6;
  const double fd = (t.value(Point{1.0 + h}) - t.value(Point{1.0 - h})) / (2.0 * h);
  EXPECT_NEAR(grad_f(t, Point{1.0})[0], fd, 1e-7);
  EXPECT_THROW(sine_perturbation(-0.1, 1.0, 1), Error);
  EXPECT_THROW(sine_perturbation(0.1, 0.0, 1), Error);
}

TEST(Mixture, ExactSamplerMatchesMoments) {
  const GaussianMixture m({0.25, 0.75}, {{-2.0}, {2.0}}, 1.0);
  Rng rng(5);
  const auto xs = sample_exact(m, 1.0, 40000, rng);
  double mean = 0.0;
  for (const auto& x : xs) mean += x[0];
  mean /= static_cast<double>(xs.size());
  // E x = 0.25 (-2) + 0.75 (2) = 1; Var x = 1 + 4 - 1 = 4.
  EXPECT_NEAR(mean, 1.0, 3.0 * 2.0 / std::sqrt(40000.0));
}
