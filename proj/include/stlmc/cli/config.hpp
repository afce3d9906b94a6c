#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "stlmc/error.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/tempering.hpp"

namespace stlmc::cli {

using json = nlohmann::json;

/// Raised for anything that should end the process with exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PerturbationSpec {
  double amplitude = 0.0;
  double scale = 1.0;
};

struct TargetSpec {
  std::vector<double> weights;
  std::vector<Point> means;
  double sigma2 = 1.0;
  std::optional<PerturbationSpec> perturbation;
};

using AnyTarget = std::variant<GaussianMixture, PerturbedTarget>;

struct RunConfig {
  std::optional<TargetSpec> target;
  RunParams run;
  bool seed_set = false;
  double c1 = 1.0;
  double c2 = 1.0;
  ProposalMode proposal_mode = ProposalMode::neighbor;
  std::string output_dir = "out";
  std::string estimates_in;  // sample: reuse saved estimates instead of re-estimating
  bool trace = false;        // sample: also write the trace of replica 0 of the final round
  // analyze
  std::size_t n_cells = 0;   // 0 picks 400 (d = 1) or 40 (d = 2)
  double analyze_T = 1.0;
  // compare
  bool unequal_variance_demo = true;
};

/// Built-in targets: desk (w = (1/2, 1/2), mu = -3, +3, sigma2 = 1), gaussian
/// (single centered unit Gaussian), perturbed-desk (desk plus 0.2 prod sin(x_j)).
inline TargetSpec preset_target(const std::string& name) {
  TargetSpec t;
  if (name == "desk" || name == "perturbed-desk") {
    t.weights = {0.5, 0.5};
    t.means = {{-3.0}, {3.0}};
    if (name == "perturbed-desk") t.perturbation = PerturbationSpec{0.2, 1.0};
  } else if (name == "gaussian") {
    t.weights = {1.0};
    t.means = {{0.0}};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk, gaussian or perturbed-desk)");
  }
  return t;
}

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown field '" + it.key() + "' in " + where);
}

template <class V>
void read(const json& j, const char* key, V& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<V>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline TargetSpec parse_target(const json& j) {
  detail::reject_unknown(j, {"weights", "means", "sigma2", "perturbation"}, "target");
  TargetSpec t;
  if (!j.contains("weights") || !j.contains("means")) throw ConfigError("target needs weights and means");
  detail::read(j, "weights", t.weights, "target");
  detail::read(j, "means", t.means, "target");
  detail::read(j, "sigma2", t.sigma2, "target");
  if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
    const json& p = j.at("perturbation");
    detail::reject_unknown(p, {"amplitude", "scale"}, "target.perturbation");
    PerturbationSpec spec;
    detail::read(p, "amplitude", spec.amplitude, "target.perturbation");
    detail::read(p, "scale", spec.scale, "target.perturbation");
    t.perturbation = spec;
  }
  return t;
}

inline json target_to_json(const TargetSpec& t) {
  json j{{"weights", t.weights}, {"means", t.means}, {"sigma2", t.sigma2}};
  if (t.perturbation) j["perturbation"] = {{"amplitude", t.perturbation->amplitude}, {"scale", t.perturbation->scale}};
  return j;
}

inline RunConfig parse_config(const json& j) {
  detail::reject_unknown(j, {"target", "run", "output_dir", "estimates_in", "trace", "analyze", "compare"}, "config");
  RunConfig c;
  if (j.contains("target")) c.target = parse_target(j.at("target"));
  if (j.contains("run")) {
    const json& r = j.at("run");
    detail::reject_unknown(r,
                           {"eta", "T", "t", "m", "delta", "seed", "max_retries", "samples", "workers", "c1", "c2",
                            "proposal_mode"},
                           "run");
    detail::read(r, "eta", c.run.eta, "run");
    detail::read(r, "T", c.run.T, "run");
    detail::read(r, "t", c.run.t, "run");
    detail::read(r, "m", c.run.m, "run");
    detail::read(r, "delta", c.run.delta, "run");
    if (r.contains("seed")) {
      detail::read(r, "seed", c.run.seed, "run");
      c.seed_set = true;
    }
    detail::read(r, "max_retries", c.run.max_retries, "run");
    detail::read(r, "samples", c.run.samples, "run");
    detail::read(r, "workers", c.run.workers, "run");
    detail::read(r, "c1", c.c1, "run");
    detail::read(r, "c2", c.c2, "run");
    std::string mode = to_string(c.proposal_mode);
    detail::read(r, "proposal_mode", mode, "run");
    c.proposal_mode = parse_proposal_mode(mode);
  }
  detail::read(j, "output_dir", c.output_dir, "config");
  detail::read(j, "estimates_in", c.estimates_in, "config");
  detail::read(j, "trace", c.trace, "config");
  if (j.contains("analyze")) {
    detail::reject_unknown(j.at("analyze"), {"n_cells", "T"}, "analyze");
    detail::read(j.at("analyze"), "n_cells", c.n_cells, "analyze");
    detail::read(j.at("analyze"), "T", c.analyze_T, "analyze");
  }
  if (j.contains("compare")) {
    detail::reject_unknown(j.at("compare"), {"unequal_variance_demo"}, "compare");
    detail::read(j.at("compare"), "unequal_variance_demo", c.unequal_variance_demo, "compare");
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline AnyTarget build_target(const TargetSpec& spec) {
  try {
    GaussianMixture mix(spec.weights, spec.means, spec.sigma2);
    if (!spec.perturbation) return mix;
    return PerturbedTarget(mix, sine_perturbation(spec.perturbation->amplitude, spec.perturbation->scale, mix.dim()));
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid target: ") + e.what());
  }
}

inline const GaussianMixture& base_mixture(const AnyTarget& t) {
  return std::visit([](const auto& x) -> const GaussianMixture& { return x.mixture(); }, t);
}

/// Checks everything a command needs before any compute starts.
inline AnyTarget validate(const RunConfig& c, bool needs_seed) {
  if (!c.target) throw ConfigError("no target given (use a config file with a target section or --preset)");
  AnyTarget target = build_target(*c.target);
  try {
    c.run.validate(base_mixture(target));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(c.c1 > 0.0 && c.c2 > 0.0)) throw ConfigError("c1 and c2 must be positive");
  if (needs_seed && !c.seed_set) throw ConfigError("a seed is required (run.seed or --seed)");
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  return target;
}

}  // namespace stlmc::cli
