#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stlmc/cli/commands.hpp"
#include "stlmc/cli/verify.hpp"

namespace {

using stlmc::cli::ConfigError;
using stlmc::cli::RunConfig;

/// Command-line values; unset options leave the config file untouched.
struct Overrides {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta, T, delta, c1, c2, analyze_T;
  std::optional<std::size_t> t, m, samples, workers, max_retries, n_cells;
  std::optional<std::string> proposal_mode, out, estimates;
  bool trace = false;
  bool no_demo = false;
};

void add_run_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON config file");
  cmd.add_option("--preset", o.preset, "built-in target: desk, gaussian or perturbed-desk");
  cmd.add_option("--seed", o.seed, "root seed");
  cmd.add_option("--eta", o.eta, "Langevin step size");
  cmd.add_option("--T", o.T, "Langevin time per macro-step");
  cmd.add_option("--t", o.t, "tempering steps per chain run");
  cmd.add_option("--m", o.m, "samples per estimation round (0 derives it from delta)");
  cmd.add_option("--delta", o.delta, "estimation failure probability");
  cmd.add_option("--samples", o.samples, "samples to return");
  cmd.add_option("--workers", o.workers, "worker threads");
  cmd.add_option("--max-retries", o.max_retries, "chain restarts per sample");
  cmd.add_option("--c1", o.c1, "first-temperature constant");
  cmd.add_option("--c2", o.c2, "temperature-spacing constant");
  cmd.add_option("--proposal-mode", o.proposal_mode, "neighbor or uniform");
  cmd.add_option("--out", o.out, "output directory");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : stlmc::cli::load_config(o.config_path);
  if (!o.preset.empty()) c.target = stlmc::cli::preset_target(o.preset);
  if (o.seed) {
    c.run.seed = *o.seed;
    c.seed_set = true;
  }
  if (o.eta) c.run.eta = *o.eta;
  if (o.T) c.run.T = *o.T;
  if (o.t) c.run.t = *o.t;
  if (o.m) c.run.m = *o.m;
  if (o.delta) c.run.delta = *o.delta;
  if (o.samples) c.run.samples = *o.samples;
  if (o.workers) c.run.workers = *o.workers;
  if (o.max_retries) c.run.max_retries = *o.max_retries;
  if (o.c1) c.c1 = *o.c1;
  if (o.c2) c.c2 = *o.c2;
  if (o.proposal_mode) {
    try {
      c.proposal_mode = stlmc::parse_proposal_mode(*o.proposal_mode);
    } catch (const stlmc::Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.out) c.output_dir = *o.out;
  if (o.estimates) c.estimates_in = *o.estimates;
  if (o.trace) c.trace = true;
  if (o.n_cells) c.n_cells = *o.n_cells;
  if (o.analyze_T) c.analyze_T = *o.analyze_T;
  if (o.no_demo) c.unequal_variance_demo = false;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated tempering Langevin Monte Carlo for Gaussian mixtures"};
  app.require_subcommand(1);
  Overrides o;
  std::string suite = "all";

  auto* sample = app.add_subcommand("sample", "draw samples with the full algorithm");
  add_run_options(*sample, o);
  sample->add_option("--estimates", o.estimates, "reuse partition-function estimates from this file");
  sample->add_flag("--trace", o.trace, "also write the trace of one final-round chain");

  auto* compare = app.add_subcommand("compare", "tempering against plain Langevin at a matched gradient budget");
  add_run_options(*compare, o);
  compare->add_flag("--no-unequal-variance-demo", o.no_demo, "skip the unequal-variance scenario");

  auto* estimate = app.add_subcommand("estimate-z", "partition-function estimates against quadrature");
  add_run_options(*estimate, o);

  auto* analyze = app.add_subcommand("analyze", "spectral report of discretized generators across the ladder");
  add_run_options(*analyze, o);
  analyze->add_option("--n-cells", o.n_cells, "grid cells per axis");
  analyze->add_option("--analyze-T", o.analyze_T, "time horizon for the transition matrices");

  auto* verify = app.add_subcommand("verify", "run the property suites");
  verify->add_option("--suite", suite, "all or one suite name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stlmc::cli::exit_usage;
  }

  try {
    if (verify->parsed()) return stlmc::cli::cmd_verify(suite, std::cout);
    const RunConfig config = resolve(o);
    if (sample->parsed()) return stlmc::cli::cmd_sample(config, std::cout);
    if (compare->parsed()) return stlmc::cli::cmd_compare(config, std::cout);
    if (estimate->parsed()) return stlmc::cli::cmd_estimate_z(config, std::cout);
    return stlmc::cli::cmd_analyze(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stlmc::cli::exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stlmc::cli::exit_failure;
  }
}
