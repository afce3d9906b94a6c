#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"
#include "stlmc/cli/config.hpp"
#include "stlmc/cli/io.hpp"
#include "stlmc/diagnostics.hpp"
#include "stlmc/heteroscedastic.hpp"
#include "stlmc/langevin_generator.hpp"
#include "stlmc/partition_estimator.hpp"
#include "stlmc/structural.hpp"
#include "stlmc/tempering_bounds.hpp"

namespace stlmc::cli {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

namespace detail {

inline json occupancy_json(const ChainStats& s) {
  json occ = json::array();
  const double total = static_cast<double>(std::max<std::size_t>(1, s.steps));
  for (auto c : s.occupancy) occ.push_back(static_cast<double>(c) / total);
  return occ;
}

/// Acceptance rate for every level pair with at least one proposal; levels 1-based.
inline json acceptance_json(const ChainStats& s) {
  json rows = json::array();
  for (std::size_t a = 0; a < s.levels; ++a)
    for (std::size_t b = 0; b < s.levels; ++b) {
      const std::size_t n = s.swaps_proposed[a * s.levels + b];
      if (n == 0) continue;
      rows.push_back({{"from", a + 1}, {"to", b + 1}, {"proposed", n}, {"rate", s.acceptance_rate(a, b)}});
    }
  return rows;
}

/// Nearest-mean assignment of each point.
inline std::vector<double> mode_fractions(const std::vector<Point>& points, const GaussianMixture& mix) {
  return mode_occupancy(points, mix.means(), std::numeric_limits<double>::infinity()).fractions;
}

template <Target T>
std::optional<double> histogram_tv(const std::vector<Point>& points, const T& target) {
  if (target.dim() > 2) return std::nullopt;
  Histogram hist = Histogram::for_mixture(target.mixture(), target.dim() == 1 ? 100 : 40);
  hist.add_all(points);
  return tv_distance(hist, target);
}

inline void print_fractions(std::ostream& out, const std::vector<double>& f) {
  out << '(';
  for (std::size_t i = 0; i < f.size(); ++i) out << (i ? ", " : "") << std::fixed << std::setprecision(4) << f[i];
  out << ')';
  out.unsetf(std::ios::floatfield);
}

}  // namespace detail

/// Runs the main algorithm (or only its last round when saved estimates are
/// given) and writes samples.csv, estimates.json and summary.json.
inline int cmd_sample(const RunConfig& config, std::ostream& out) {
  const AnyTarget target = validate(config, true);
  const GaussianMixture& mix = base_mixture(target);
  const TemperatureLadder ladder = make_ladder(mix, config.c1, config.c2, config.proposal_mode);
  std::optional<SavedEstimates> saved;
  if (!config.estimates_in.empty()) {
    saved = load_estimates(config.estimates_in);
    if (saved->betas.size() != ladder.levels())
      throw ConfigError("saved estimates cover " + std::to_string(saved->betas.size()) + " levels, the ladder has " +
                        std::to_string(ladder.levels()));
    for (std::size_t i = 0; i < ladder.levels(); ++i)
      if (std::abs(saved->betas[i] - ladder.betas[i]) > 1e-12)
        throw ConfigError("saved estimates were made on a different ladder");
  }
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);

  return std::visit(
      [&](const auto& t) -> int {
        MainResult result;
        try {
          result = saved ? sample_with_estimates(t, ladder, saved->estimates, config.run)
                         : run_main_algorithm(t, ladder, config.run);
        } catch (const RetriesExhaustedError& e) {
          out << "sampling failed: " << e.what() << '\n';
          return exit_failure;
        }
        {
          auto f = open_output(dir / "samples.csv");
          write_samples_csv(f, result.samples, t.dim());
        }
        write_json(dir / "estimates.json", estimates_to_json(ladder, result.estimates, config));
        json summary;
        summary["levels"] = ladder.levels();
        summary["betas"] = ladder.betas;
        summary["samples"] = result.samples.size();
        summary["gradient_evaluations"] = result.gradient_evaluations;
        summary["attempts"] = result.attempts;
        summary["final_round"] = {{"occupancy", detail::occupancy_json(result.final_stats)},
                                  {"acceptance", detail::acceptance_json(result.final_stats)},
                                  {"final_level_histogram", result.final_level_histogram}};
        const auto fractions = detail::mode_fractions(result.samples, mix);
        summary["mode_fractions"] = fractions;
        const auto tv = detail::histogram_tv(result.samples, t);
        if (tv) summary["tv"] = *tv;
        write_json(dir / "summary.json", summary);
        if (config.trace) {
          Rng rng = Rng::stream(config.run.seed, ladder.levels(), 0);
          const StlmcResult traced =
              run_stlmc(t, ladder.prefix(ladder.levels()), result.estimates, config.run, rng, true);
          auto f = open_output(dir / "trace.csv");
          write_trace_csv(f, traced.trace, t.dim());
        }
        out << "levels " << ladder.levels() << ", samples " << result.samples.size() << ", gradient evaluations "
            << result.gradient_evaluations << "\nmode fractions ";
        detail::print_fractions(out, fractions);
        out << '\n';
        if (tv) out << "histogram TV " << *tv << '\n';
        out << "wrote " << (dir / "samples.csv").string() << '\n';
        return exit_ok;
      },
      target);
}

/// Estimation rounds only; writes estimates.json and, for d <= 2, compares
/// against quadrature.
inline int cmd_estimate_z(const RunConfig& config, std::ostream& out) {
  const AnyTarget target = validate(config, true);
  const GaussianMixture& mix = base_mixture(target);
  const TemperatureLadder ladder = make_ladder(mix, config.c1, config.c2, config.proposal_mode);
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  return std::visit(
      [&](const auto& t) -> int {
        EstimationResult est;
        try {
          est = estimate_partition_functions(t, ladder, config.run);
        } catch (const RetriesExhaustedError& e) {
          out << "estimation failed: " << e.what() << '\n';
          return exit_failure;
        }
        write_json(dir / "estimates.json", estimates_to_json(ladder, est.estimates, config));
        out << "level  beta        log_zhat";
        const bool oracle = t.dim() <= 2;
        if (oracle) out << "     log_z(quad)  error";
        out << '\n';
        const double log_z1 = oracle ? log_partition_function(t, ladder.betas[0]) : 0.0;
        for (std::size_t l = 0; l < ladder.levels(); ++l) {
          out << std::setw(5) << l + 1 << "  " << std::setw(10) << ladder.betas[l] << "  " << std::setw(10)
              << est.estimates.log_zhat[l];
          if (oracle) {
            const double truth = log_partition_function(t, ladder.betas[l]) - log_z1;
            out << "  " << std::setw(11) << truth << "  " << est.estimates.log_zhat[l] - truth;
          }
          out << '\n';
        }
        out << "gradient evaluations " << est.gradient_evaluations << '\n';
        return exit_ok;
      },
      target);
}

struct PlainLangevinResult {
  std::vector<Point> endpoints;
  std::vector<double> trajectory_fractions;  // share of all steps nearest each mean
};

/// `chains` plain Langevin runs at beta = 1 from `start`, each `steps` steps;
/// chain j uses stream (seed, 2^32, j).
template <Target T>
PlainLangevinResult run_plain_langevin(const T& target, double eta, const Point& start, std::size_t chains,
                                       std::size_t steps, std::uint64_t seed, std::size_t workers) {
  const auto& mix = target.mixture();
  const std::size_t d = target.dim();
  std::vector<Point> ends(chains);
  std::vector<std::vector<std::size_t>> visits(chains, std::vector<std::size_t>(mix.components(), 0));
  stlmc::detail::parallel_for(chains, workers, [&](std::size_t j) {
    Rng rng = Rng::stream(seed, std::uint64_t{1} << 32, j);
    Point x = start, noise(d), grad(d);
    for (std::size_t s = 0; s < steps; ++s) {
      rng.fill_normal(noise);
      stlmc::detail::langevin_update(target, eta, 1.0, x, noise, grad);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < mix.components(); ++i) {
        const double dist = stlmc::detail::squared_distance(x, mix.means()[i]);
        if (dist < best_d) {
          best_d = dist;
          best = i;
        }
      }
      ++visits[j][best];
    }
    ends[j] = x;
  });
  PlainLangevinResult r;
  r.endpoints = std::move(ends);
  r.trajectory_fractions.assign(mix.components(), 0.0);
  double total = 0.0;
  for (const auto& v : visits)
    for (std::size_t i = 0; i < v.size(); ++i) {
      r.trajectory_fractions[i] += static_cast<double>(v[i]);
      total += static_cast<double>(v[i]);
    }
  if (total > 0.0)
    for (double& f : r.trajectory_fractions) f /= total;
  return r;
}

/// Tempering against plain Langevin at the same gradient budget per returned
/// sample, plus a report-only unequal-variance scenario.
inline int cmd_compare(const RunConfig& config, std::ostream& out) {
  const AnyTarget target = validate(config, true);
  const GaussianMixture& mix = base_mixture(target);
  const TemperatureLadder ladder = make_ladder(mix, config.c1, config.c2, config.proposal_mode);
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  json report;
  const int code = std::visit(
      [&](const auto& t) -> int {
        MainResult tempering;
        try {
          tempering = run_main_algorithm(t, ladder, config.run);
        } catch (const RetriesExhaustedError& e) {
          out << "tempering failed: " << e.what() << '\n';
          return exit_failure;
        }
        const std::size_t n = tempering.samples.size();
        const std::size_t budget = (tempering.gradient_evaluations + n - 1) / n;
        const PlainLangevinResult plain =
            run_plain_langevin(t, config.run.eta, mix.means().front(), n, budget, config.run.seed, config.run.workers);
        const auto temp_fr = detail::mode_fractions(tempering.samples, mix);
        const auto plain_fr = detail::mode_fractions(plain.endpoints, mix);
        const auto temp_tv = detail::histogram_tv(tempering.samples, t);
        const auto plain_tv = detail::histogram_tv(plain.endpoints, t);
        report["gradient_budget_per_sample"] = budget;
        report["tempering"] = {{"mode_fractions", temp_fr}};
        report["plain_langevin"] = {{"mode_fractions", plain_fr},
                                    {"trajectory_fractions", plain.trajectory_fractions},
                                    {"start", mix.means().front()}};
        if (temp_tv) report["tempering"]["tv"] = *temp_tv;
        if (plain_tv) report["plain_langevin"]["tv"] = *plain_tv;
        out << "gradient budget per sample: " << budget << "\n";
        out << "tempering       modes ";
        detail::print_fractions(out, temp_fr);
        if (temp_tv) out << "  TV " << *temp_tv;
        out << "\nplain Langevin  modes ";
        detail::print_fractions(out, plain_fr);
        if (plain_tv) out << "  TV " << *plain_tv;
        out << "  (trajectory ";
        detail::print_fractions(out, plain.trajectory_fractions);
        out << ")\n";
        return exit_ok;
      },
      target);
  if (code != exit_ok) return code;

  if (config.unequal_variance_demo) {
    // Variances differ by a factor of 2; the ladder built from the smaller one
    // no longer balances the modes. Reported only.
    const std::size_t d = 3;
    Point a(d, 0.0), b(d, 0.0);
    a[0] = -3.0;
    b[0] = 3.0;
    const HeteroscedasticMixture demo({0.5, 0.5}, {a, b}, {1.0, 2.0});
    RunParams p = config.run;
    p.m = 200;
    p.samples = 500;
    const TemperatureLadder demo_ladder = make_ladder(demo.mixture(), config.c1, config.c2, config.proposal_mode);
    try {
      const MainResult r = run_main_algorithm(demo, demo_ladder, p);
      const auto fr = detail::mode_fractions(r.samples, demo.mixture());
      report["unequal_variance_demo"] = {{"dim", d},
                                         {"variances", demo.variances()},
                                         {"levels", demo_ladder.levels()},
                                         {"mode_fractions", fr},
                                         {"true_masses", demo.mixture().weights()}};
      out << "unequal-variance demo (d = 3, variances 1 and 2): modes ";
      detail::print_fractions(out, fr);
      out << " vs true (0.5000, 0.5000)\n";
    } catch (const RetriesExhaustedError& e) {
      report["unequal_variance_demo"] = {{"error", e.what()}};
      out << "unequal-variance demo: " << e.what() << '\n';
    }
  }
  write_json(dir / "compare.json", report);
  return exit_ok;
}

/// Eigenvalue tables of discretized generators across the ladder, overlaps of
/// adjacent levels, and Z-ratio bound margins. Refuses d > 2.
inline int cmd_analyze(const RunConfig& config, std::ostream& out) {
  const AnyTarget target = validate(config, false);
  const GaussianMixture& mix = base_mixture(target);
  if (mix.dim() > 2) {
    out << "analyze needs d <= 2 (dense eigen-solves); this target has d = " << mix.dim() << '\n';
    return exit_usage;
  }
  const TemperatureLadder ladder = make_ladder(mix, config.c1, config.c2, config.proposal_mode);
  const std::size_t cells = config.n_cells > 0 ? config.n_cells : (mix.dim() == 1 ? 400 : 40);
  const double R = generator_radius(mix, ladder.betas.front());
  const std::size_t shown = mix.components() + 2;
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  json report;
  report["grid"] = {{"radius", R}, {"cells_per_axis", cells}};
  std::visit(
      [&](const auto& t) {
        std::vector<Vector> dists;
        out << "beta        eigenvalues of -L (first " << shown << ")   gap of P_T\n";
        for (double beta : ladder.betas) {
          const DiscretizedGenerator g = discretize_langevin_generator(t, beta, R, cells);
          const Vector ev = g.eigenvalues();
          const std::size_t k = std::min<std::size_t>(shown, static_cast<std::size_t>(ev.size()));
          std::vector<double> first(ev.data(), ev.data() + k);
          const double chain_gap = 1.0 - std::exp(-(ev.size() > 1 ? ev(1) : 0.0) * config.analyze_T);
          report["levels"].push_back({{"beta", beta}, {"eigenvalues", first}, {"chain_gap", chain_gap}});
          out << std::setw(10) << beta << "  ";
          for (double v : first) out << std::setw(11) << v << ' ';
          out << "  " << chain_gap << '\n';
          dists.push_back(g.pi);
        }
        out << "adjacent pair  overlap delta  Z ratio  lower bound\n";
        for (std::size_t i = 1; i < ladder.levels(); ++i) {
          const double delta =
              overlap_delta({dists[i - 1], dists[i]}, {Partition::whole(dists[i].size()), Partition::whole(dists[i].size())});
          json row{{"pair", {i, i + 1}}, {"delta", delta}};
          out << std::setw(6) << i << "-" << i + 1 << "  " << std::setw(13) << delta;
          const ZRatioCheck z = z_ratio_bound_check(mix, ladder.betas[i - 1], ladder.betas[i]);
          row["z_ratio"] = z.ratio;
          row["z_lower_bound"] = z.lower_bound;
          out << "  " << std::setw(7) << z.ratio << "  " << z.lower_bound;
          report["pairs"].push_back(row);
          out << '\n';
        }
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, PerturbedTarget>) {
          const auto a = discretize_langevin_generator(t, 1.0, R, cells);
          const auto b = discretize_langevin_generator(t.mixture(), 1.0, R, cells);
          const PerturbationGapCheck pc = perturbation_gap_check(a, b, t.sup_bound());
          report["perturbation"] = {{"ratios", pc.ratios}, {"lower", pc.lower}, {"upper", pc.upper}};
          out << "perturbation eigenvalue ratios within [" << pc.lower << ", " << pc.upper
              << "]: " << (pc.holds() ? "yes" : "no") << '\n';
        }
      },
      target);
  write_json(dir / "analyze.json", report);
  return exit_ok;
}

}  // namespace stlmc::cli
