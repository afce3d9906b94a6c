#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "stlmc/stlmc.hpp"

namespace stlmc::cli {

struct CheckLine {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace verify_detail {

inline constexpr std::uint64_t seed = 20180112;

class Suite {
 public:
  explicit Suite(std::string name) : name_(std::move(name)) {}

  void check(const std::string& name, bool passed, const std::string& detail) {
    lines_.push_back({name_, name, passed, detail});
  }

  /// Runs `trial` for k = 0..count-1 on stream (seed, family, k) and records
  /// how many instances satisfied it; one failure fails the line.
  void sweep(const std::string& name, std::size_t count, std::uint64_t family,
             const std::function<bool(Rng&)>& trial) {
    std::size_t ok = 0;
    for (std::size_t k = 0; k < count; ++k) {
      Rng rng = Rng::stream(seed, family, k);
      if (trial(rng)) ++ok;
    }
    check(name, ok == count, std::to_string(ok) + "/" + std::to_string(count) + " instances");
  }

  std::vector<CheckLine> take() { return std::move(lines_); }

 private:
  std::string name_;
  std::vector<CheckLine> lines_;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

inline Point random_point(std::size_t d, double scale, Rng& rng) {
  Point x(d);
  for (auto& v : x) v = scale * rng.normal();
  return x;
}

inline double norm(std::span<const double> x) { return std::sqrt(stlmc::detail::squared_distance(x, Point(x.size(), 0.0))); }

/// Uniform point in the centered ball of the given radius.
inline Point point_in_ball(std::size_t d, double radius, Rng& rng) {
  Point x = random_point(d, 1.0, rng);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::max(norm(x), 1e-300);
  for (auto& v : x) v *= r;
  return x;
}

inline GaussianMixture desk() { return GaussianMixture({0.5, 0.5}, {{-3.0}, {3.0}}, 1.0); }

inline std::vector<double> random_distribution(std::size_t n, Rng& rng, bool allow_zero = false) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) {
    v = rng.uniform();
    if (allow_zero && rng.uniform() < 0.2) v = 0.0;
    total += v;
  }
  if (total == 0.0) p[0] = total = 1.0;
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace verify_detail

inline std::vector<CheckLine> verify_mixture() {
  using namespace verify_detail;
  Suite s("mixture");
  s.sweep("gradient matches central differences", 1000, 1, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const Point x = random_point(mix.dim(), mix.radius() + 3.0, rng);
    const Point g = grad_f(mix, x);
    double err = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double h = 1e-5;
      Point a = x, b = x;
      a[j] += h;
      b[j] -= h;
      const double fd = (mix.value(a) - mix.value(b)) / (2.0 * h);
      err += (g[j] - fd) * (g[j] - fd);
      scale += fd * fd;
    }
    return std::sqrt(err) / std::max(1.0, std::sqrt(scale)) <= 1e-6;
  });
  s.sweep("growth f(x) >= (|x| - D)_+^2 / (2 sigma2)", 10000, 2, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const Point x = random_point(mix.dim(), 3.0 * (mix.radius() + 1.0), rng);
    const double excess = std::max(0.0, norm(x) - mix.radius());
    return mix.value(x) >= excess * excess / (2.0 * mix.sigma2()) - 1e-12;
  });
  s.sweep("close-to-sum ratio in [1, 1/w_min]", 10000, 3, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const double beta = 1.0 - rng.uniform();
    const Point x = random_point(mix.dim(), mix.radius() + 2.0, rng);
    const double r = close_to_sum_ratio(mix, beta, x);
    return r >= 1.0 - 1e-12 && r <= (1.0 / mix.w_min()) * (1.0 + 1e-12);
  });
  s.sweep("Hessian max eigenvalue <= 2/sigma2", 1000, 4, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const Point x = random_point(mix.dim(), mix.radius() + 2.0, rng);
    return hessian_max_eig(mix, x) <= 2.0 / mix.sigma2() + 1e-4;
  });
  s.sweep("translation covariance", 1000, 5, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const Point x = random_point(mix.dim(), 3.0, rng);
    const Point v = random_point(mix.dim(), 5.0, rng);
    std::vector<Point> means = mix.means();
    for (auto& mu : means)
      for (std::size_t j = 0; j < v.size(); ++j) mu[j] += v[j];
    Point xs = x;
    for (std::size_t j = 0; j < v.size(); ++j) xs[j] += v[j];
    const GaussianMixture shifted(mix.weights(), means, mix.sigma2());
    const double f = mix.value(x);
    return std::abs(shifted.value(xs) - f) <= 1e-12 * std::max(1.0, std::abs(f));
  });
  s.sweep("|x*| <= sqrt(2) D", 100, 6, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    return norm(locate_min(mix)) <= std::sqrt(2.0) * mix.radius() + 1e-6;
  });
  s.sweep("perturbation within declared Delta and tau", 10, 7, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const PerturbedTarget t(mix, sine_perturbation(0.05 + 0.3 * rng.uniform(), 0.5 + rng.uniform(), mix.dim()));
    const double R = 2.0 * mix.radius() + 6.0 * std::sqrt(mix.sigma2());
    Point ga(mix.dim()), gb(mix.dim());
    for (int k = 0; k < 1000; ++k) {
      const Point x = point_in_ball(mix.dim(), R, rng);
      const double fa = t.value_and_gradient(x, ga);
      const double fb = mix.value_and_gradient(x, gb);
      if (std::abs(fa - fb) > t.sup_bound() + 1e-12) return false;
      if (std::sqrt(stlmc::detail::squared_distance(ga, gb)) > t.grad_bound() + 1e-12) return false;
    }
    return true;
  });
  return s.take();
}

inline std::vector<CheckLine> verify_langevin() {
  using namespace verify_detail;
  Suite s("langevin");
  {
    const GaussianMixture mix = desk();
    const LangevinParams p{.eta = 0.01, .T = 1.0, .beta = 1.0};
    Rng a = Rng::stream(seed, 10, 0), b = Rng::stream(seed, 10, 0);
    Point xa{0.5}, xb{0.5};
    bool same = true;
    for (int k = 0; k < 100; ++k) {
      xa = run_macro_step(mix, p, xa, a);
      xb = run_macro_step(mix, p, xb, b);
      same = same && xa == xb;
    }
    s.check("identical seeds give identical trajectories", same, "100 macro-steps");
  }
  {
    const GaussianMixture g({1.0}, {{0.0}}, 1.0);
    const LangevinParams p{.eta = 0.01, .T = 10.0, .beta = 1.0};
    Rng rng = Rng::stream(seed, 11, 0);
    Point x{0.0};
    double sum = 0.0, sq = 0.0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
      x = run_macro_step(g, p, x, rng);
      sum += x[0];
      sq += x[0] * x[0];
    }
    const double var = sq / n - (sum / n) * (sum / n);
    s.check("stationary variance of a unit Gaussian in [0.93, 1.08]", var >= 0.93 && var <= 1.08,
            "variance " + fmt(var));
  }
  s.sweep("drift within (4 beta D^2/sigma2 + 2d) T", 5, 12, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng, 2);
    const LangevinParams p{.eta = 0.01 * mix.sigma2(), .T = 1.0, .beta = 0.2 + 0.8 * rng.uniform()};
    const Point x_star = locate_min(mix);
    return drift_check(mix, p, x_star, 1000, rng.index(1u << 30)).holds();
  });
  s.sweep("step eta sigma2 in x equals step eta in x/sigma", 100, 13, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const double sigma = std::sqrt(mix.sigma2());
    std::vector<Point> scaled = mix.means();
    for (auto& mu : scaled)
      for (auto& v : mu) v /= sigma;
    const GaussianMixture unit(mix.weights(), scaled, 1.0);
    const double eta = 0.01, beta = 1.0 - 0.9 * rng.uniform();
    const std::uint64_t stream = rng.index(1u << 30);
    Rng ra = Rng::stream(seed, stream, 0), rb = Rng::stream(seed, stream, 0);
    Point x = random_point(mix.dim(), 2.0, rng), y = x;
    for (auto& v : y) v /= sigma;
    const LangevinParams pa{.eta = eta * mix.sigma2(), .T = 0.2 * mix.sigma2(), .beta = beta};
    const LangevinParams pb{.eta = eta, .T = 0.2, .beta = beta};
    x = run_macro_step(mix, pa, x, ra);
    y = run_macro_step(unit, pb, y, rb);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (std::abs(x[j] - sigma * y[j]) > 1e-9 * std::max(1.0, std::abs(x[j]))) return false;
    return true;
  });
  return s.take();
}

inline std::vector<CheckLine> verify_tempering() {
  using namespace verify_detail;
  Suite s("tempering");
  s.sweep("ladder spacing invariants", 100, 20, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng);
    const TemperatureLadder ladder = make_ladder(mix, 1.0, 1.0);
    const auto& b = ladder.betas;
    if (b.back() != 1.0) return false;
    if (mix.radius() > 0.0 && b.front() > ladder_first_beta(mix, 1.0) * (1.0 + 1e-12)) return false;
    for (std::size_t i = 1; i < b.size(); ++i)
      if (!(b[i] > b[i - 1]) || b[i] - b[i - 1] > ladder_spacing(mix, 1.0) * (1.0 + 1e-12)) return false;
    return true;
  });
  s.sweep("level-move detailed balance with exact Z", 1000, 21, [](Rng& rng) {
    const GaussianMixture mix = random_mixture(rng, 2);
    TemperatureLadder ladder = make_ladder(mix, 1.0, 1.0);
    ladder.rel_weights = random_weights(ladder.levels(), rng);
    PartitionEstimates z;
    z.log_zhat.resize(ladder.levels());
    for (auto& v : z.log_zhat) v = rng.normal();
    const std::size_t k = rng.index(ladder.levels()), k2 = rng.index(ladder.levels());
    const double f = mix.value(random_point(mix.dim(), mix.radius() + 2.0, rng));
    // Joint mass r_i e^{-beta_i f} / Z_i with Zhat taken as the exact normalizers.
    auto log_mass = [&](std::size_t i) {
      return std::log(ladder.rel_weights[i]) - ladder.betas[i] * f - z.log_zhat[i];
    };
    const double lhs = log_mass(k) + std::log(type2_accept_prob(f, k, k2, ladder, z));
    const double rhs = log_mass(k2) + std::log(type2_accept_prob(f, k2, k, ladder, z));
    return std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs));
  });
  return s.take();
}

inline std::vector<CheckLine> verify_chain_analysis() {
  using namespace verify_detail;
  Suite s("chain_analysis");
  auto chain_and_partition = [](Rng& rng) {
    const std::size_t n = 2 + rng.index(11);
    FiniteChain c = random_reversible_chain(n, rng);
    Partition part = random_partition(n, 1 + rng.index(n), rng);
    return std::pair{std::move(c), std::move(part)};
  };
  s.sweep("gap product bounds", 100, 30, [&](Rng& rng) {
    auto [c, part] = chain_and_partition(rng);
    return gap_product_check(c, part).holds();
  });
  s.sweep("Cheeger Phi^2/2 <= Gap <= 2 Phi", 100, 31, [&](Rng& rng) {
    return cheeger_check(chain_and_partition(rng).first).holds();
  });
  s.sweep("projection eigenvalue dominance", 100, 32, [&](Rng& rng) {
    auto [c, part] = chain_and_partition(rng);
    return projection_dominance_check(c, part).holds();
  });
  s.sweep("restriction and projection stationarity", 100, 33, [&](Rng& rng) {
    auto [c, part] = chain_and_partition(rng);
    const FiniteChain bar = project(c, part);
    const auto masses = part.masses(c.p);
    for (std::size_t b = 0; b < part.blocks; ++b) {
      if (std::abs(bar.p(stlmc::detail::idx(b)) - masses[b]) > 1e-8) return false;
      const FiniteChain r = restrict_chain(c, part.members(b));
      if ((r.p - stationary(r.P)).cwiseAbs().maxCoeff() > 1e-8) return false;
    }
    return bar.stationarity_residual() <= 1e-8;
  });
  s.sweep("chi-square decay", 100, 34, [](Rng& rng) {
    const std::size_t n = 2 + rng.index(9);
    const FiniteChain c = random_reversible_chain(n, rng);
    const auto p0 = random_distribution(n, rng);
    return chi_sq_decay_check(c, Eigen::Map<const Vector>(p0.data(), stlmc::detail::idx(n)), 50).holds();
  });
  s.sweep("tempering chain stationary for r_i p_i", 100, 35, [](Rng& rng) {
    const auto mode = rng.uniform() < 0.5 ? ProposalMode::uniform : ProposalMode::neighbor;
    const TemperingInstance inst = random_tempering_instance(rng, mode, false);
    return inst.chain.chain.stationarity_residual() <= 1e-8 && inst.chain.chain.is_reversible(1e-8);
  });
  return s.take();
}

inline std::vector<CheckLine> verify_tempering_bounds() {
  using namespace verify_detail;
  Suite s("tempering-bounds");
  s.sweep("gap bound, uniform proposal", 100, 40, [](Rng& rng) {
    const auto inst = random_tempering_instance(rng, ProposalMode::uniform, false);
    return tempering_gap_bound_check(inst.chain, inst.partitions).holds();
  });
  s.sweep("gap bound, neighbor proposal", 100, 41, [](Rng& rng) {
    const auto inst = random_tempering_instance(rng, ProposalMode::neighbor, false);
    return tempering_gap_bound_check(inst.chain, inst.partitions).holds();
  });
  s.sweep("refinement gap bound", 50, 42, [](Rng& rng) {
    const auto mode = rng.uniform() < 0.5 ? ProposalMode::uniform : ProposalMode::neighbor;
    const auto inst = random_tempering_instance(rng, mode, true);
    return refinement_gap_bound_check(inst.chain, inst.partitions).holds();
  });
  {
    const auto inst = clustered_instance(8, 3, 0.01, ProposalMode::uniform);
    const BoundCheck coarse = tempering_gap_bound_check(inst.chain, inst.partitions);
    const BoundCheck fine = refinement_gap_bound_check(inst.chain, inst.partitions);
    s.check("refinement bound beats the coarse bound on 8 clusters",
            fine.bound > coarse.bound && fine.holds() && coarse.holds(),
            "refinement " + fmt(fine.bound) + " vs coarse " + fmt(coarse.bound) + ", gap " + fmt(fine.gap));
  }
  return s.take();
}

inline std::vector<CheckLine> verify_structural() {
  using namespace verify_detail;
  Suite s("structural");
  {
    const GaussianMixture mix = desk();
    const TemperatureLadder ladder = make_ladder(mix, 1.0, 1.0);
    bool ok = true;
    double lowest = 1.0;
    for (std::size_t i = 0; i + 1 < ladder.levels(); ++i) {
      const ZRatioCheck c = z_ratio_bound_check(mix, ladder.betas[i], ladder.betas[i + 1]);
      ok = ok && c.holds() && c.ratio >= 0.1;
      lowest = std::min(lowest, c.ratio);
    }
    s.check("adjacent Z ratios in [lower bound, 1] and >= 0.1 on the desk ladder", ok, "smallest " + fmt(lowest));
  }
  for (double mu : {1.0, 3.0}) {
    const GaussianMixture mix({0.5, 0.5}, {{-mu}, {mu}}, 1.0);
    std::vector<double> xs(10000), fs(10000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = -10.0 + 20.0 * static_cast<double>(i) / 9999.0;
      fs[i] = mix.value(std::span<const double>(&xs[i], 1));
    }
    const auto env = sce_envelope_1d(xs, fs, 0.5);
    double gap = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) gap = std::max(gap, fs[i] - env[i]);
    s.check("SCE gap <= D^2 for mu = +-" + fmt(mu), gap <= mu * mu + 1e-9, "gap " + fmt(gap));
  }
  {
    const GaussianMixture three({1.0 / 3, 1.0 / 3, 1.0 / 3}, {{-10.0}, {0.0}, {10.0}}, 1.0);
    const Vector ev = discretize_langevin_generator(three, 1.0, 16.0, 800).eigenvalues();
    s.check("three separated modes: lambda_2, lambda_3 <= 1e-3 and lambda_4 >= 0.1",
            ev(1) <= 1e-3 && ev(2) <= 1e-3 && ev(3) >= 0.1,
            "lambda_2..4 = " + fmt(ev(1)) + ", " + fmt(ev(2)) + ", " + fmt(ev(3)));
    const GaussianMixture g({1.0}, {{0.0}}, 1.0);
    const double gap = discretize_langevin_generator(g, 1.0, 8.0, 400).spectral_gap();
    s.check("single Gaussian generator gap >= 0.9", gap >= 0.9, "gap " + fmt(gap));
  }
  {
    const GaussianMixture mix = desk();
    const double R = generator_radius(mix, 1.0);
    const auto base = discretize_langevin_generator(mix, 1.0, R, 400);
    double previous = 0.0;
    bool ok = true;
    std::string detail;
    for (double a : {0.05, 0.2}) {
      const PerturbedTarget t(mix, sine_perturbation(a, 1.0, 1));
      const auto c = perturbation_gap_check(discretize_langevin_generator(t, 1.0, R, 400), base, a);
      ok = ok && c.holds() && c.max_log_deviation() >= previous;
      previous = c.max_log_deviation();
      detail += "a=" + fmt(a) + " max|log ratio| " + fmt(previous) + "; ";
    }
    s.check("perturbed eigenvalue ratios in [e^-2a, e^2a], tighter for smaller a", ok, detail);
  }
  return s.take();
}

inline std::vector<CheckLine> verify_diagnostics() {
  using namespace verify_detail;
  Suite s("diagnostics");
  auto components = [](std::size_t k, std::size_t n, Rng& rng) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(random_distribution(n, rng));
    return out;
  };
  s.sweep("chi-square of a mixture <= mixture of chi-squares", 1000, 50, [&](Rng& rng) {
    const std::size_t k = 1 + rng.index(4);
    const auto q = random_distribution(10, rng);
    return chi_sq_mixture_check(components(k, 10, rng), random_distribution(k, rng), q).holds();
  });
  s.sweep("KL decomposition", 1000, 51, [&](Rng& rng) {
    const std::size_t k = 1 + rng.index(4);
    const auto w = random_distribution(k, rng);
    const auto w2 = rng.uniform() < 0.2 ? w : random_distribution(k, rng);
    auto q = components(k, 10, rng);
    if (rng.uniform() < 0.2)
      for (auto& qi : q) qi = q.front();
    return kl_decomposition_check(w, w2, components(k, 10, rng), q).holds();
  });
  s.sweep("TV symmetric, bounded and triangle", 1000, 52, [](Rng& rng) {
    const auto p = random_distribution(10, rng, true), q = random_distribution(10, rng, true),
               r = random_distribution(10, rng, true);
    const double pq = tv_distance(p, q);
    return std::abs(pq - tv_distance(q, p)) <= 1e-15 && pq >= 0.0 && pq <= 1.0 + 1e-12 &&
           pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12;
  });
  s.sweep("chi-square nonnegative, zero iff equal", 1000, 53, [](Rng& rng) {
    const auto p = random_distribution(10, rng), q = random_distribution(10, rng);
    return chi_sq_divergence(p, q) > 0.0 && std::abs(chi_sq_divergence(p, p)) <= 1e-12;
  });
  {
    const GaussianMixture mix = desk();
    Rng rng = Rng::stream(seed, 54, 0);
    Histogram hist = Histogram::for_mixture(mix);
    hist.add_all(sample_exact(mix, 1.0, 100000, rng));
    const double tv = tv_distance(hist, mix);
    s.check("exact draws: histogram TV <= 0.05", tv <= 0.05, "TV " + fmt(tv));
  }
  {
    const GaussianMixture mix({0.5, 0.5}, {{-5.0}, {5.0}}, 1.0);
    Rng rng = Rng::stream(seed, 55, 0);
    const std::size_t n = 10000;
    const auto occ = mode_occupancy(sample_exact(mix, 1.0, n, rng), mix.means(), 3.0);
    const double se = std::sqrt(0.25 / static_cast<double>(n));
    s.check("exact draws: mode occupancy 1/2 within 3 SE", std::abs(occ.fractions[0] - 0.5) <= 3.0 * se,
            "fractions " + fmt(occ.fractions[0]) + ", " + fmt(occ.fractions[1]));
  }
  return s.take();
}

inline std::vector<CheckLine> verify_estimator() {
  using namespace verify_detail;
  Suite s("estimator");
  const GaussianMixture mix = desk();
  const TemperatureLadder ladder = make_ladder(mix, 1.0, 1.0);
  const double b1 = ladder.betas[0], b2 = ladder.betas[1];
  {
    const auto c = concentration_check(mix, b1, b2, 1000, 0.1, 1000, seed);
    s.check("failure rate <= Chernoff envelope + 3 SE at n=1000, eps=0.1", c.holds(),
            "rate " + fmt(c.failure_rate) + ", envelope " + fmt(c.envelope));
    const auto c4 = concentration_check(mix, b1, b2, 4000, 0.1, 1000, seed);
    s.check("failure rate does not grow from n=1000 to n=4000", c4.failure_rate <= c.failure_rate,
            fmt(c.failure_rate) + " -> " + fmt(c4.failure_rate));
  }
  {
    const GaussianMixture g({1.0}, {{0.0}}, 1.0);
    Rng rng = Rng::stream(seed, 60, 0);
    const double beta_l = 0.4, beta_next = 0.6;
    const auto xs = sample_exact(g, beta_l, 10000, rng);
    const double ratio = std::exp(estimate_next_z(xs, g, beta_l, beta_next, 0.0));
    const double truth = std::sqrt(beta_l / beta_next);
    s.check("Gaussian Z ratio within 5%", std::abs(ratio / truth - 1.0) <= 0.05,
            fmt(ratio) + " vs " + fmt(truth));
  }
  {
    Rng rng = Rng::stream(seed, 61, 0);
    const std::size_t n = 10000;
    std::vector<double> terms(n);
    for (auto& t : terms) t = std::exp(-(b2 - b1) * mix.value(sample_exact(mix, b1, rng)));
    double mean = 0.0, var = 0.0;
    for (double t : terms) mean += t;
    mean /= static_cast<double>(n);
    for (double t : terms) var += (t - mean) * (t - mean);
    const double se = std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n));
    const double truth = std::exp(log_partition_function(mix, b2) - log_partition_function(mix, b1));
    s.check("exact-sample estimator unbiased within 3 SE", std::abs(mean - truth) <= 3.0 * se,
            fmt(mean) + " vs " + fmt(truth) + " (SE " + fmt(se) + ")");
  }
  return s.take();
}

inline const std::map<std::string, std::function<std::vector<CheckLine>()>>& verify_suites() {
  static const std::map<std::string, std::function<std::vector<CheckLine>()>> suites{
      {"mixture", verify_mixture},
      {"langevin", verify_langevin},
      {"tempering", verify_tempering},
      {"chain_analysis", verify_chain_analysis},
      {"tempering-bounds", verify_tempering_bounds},
      {"structural", verify_structural},
      {"diagnostics", verify_diagnostics},
      {"estimator", verify_estimator},
  };
  return suites;
}

/// Prints one line per check; returns 0 when all pass, 1 on any failure and 2
/// for an unknown suite.
inline int cmd_verify(const std::string& suite, std::ostream& out) {
  const auto& suites = verify_suites();
  std::vector<std::string> selected;
  if (suite == "all") {
    for (const auto& [name, fn] : suites) selected.push_back(name);
  } else if (suites.count(suite)) {
    selected.push_back(suite);
  } else {
    out << "unknown suite '" << suite << "' (expected all";
    for (const auto& [name, fn] : suites) out << ", " << name;
    out << ")\n";
    return 2;
  }
  std::size_t failed = 0, total = 0;
  for (const auto& name : selected) {
    for (const auto& line : suites.at(name)()) {
      ++total;
      if (!line.passed) ++failed;
      out << (line.passed ? "PASS " : "FAIL ") << line.suite << ": " << line.name << " (" << line.detail << ")\n";
    }
  }
  out << total - failed << "/" << total << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace stlmc::cli
