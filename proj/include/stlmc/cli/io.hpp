#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stlmc/cli/config.hpp"
#include "stlmc/estimates.hpp"
#include "stlmc/tempering.hpp"

namespace stlmc::cli {

inline constexpr int csv_schema_version = 1;

/// Shortest round-trip representation, so identical runs give identical bytes.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  return out;
}

inline void write_samples_csv(std::ostream& os, const std::vector<Point>& samples, std::size_t dim) {
  os << "# stlmc samples v" << csv_schema_version << '\n' << "index";
  for (std::size_t j = 0; j < dim; ++j) os << ",x_" << j + 1;
  os << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    os << i;
    for (double v : samples[i]) os << ',' << format_double(v);
    os << '\n';
  }
}

/// Levels are written 1-based.
inline void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, std::size_t dim) {
  os << "# stlmc trace v" << csv_schema_version << '\n' << "step,level,move_type,accepted";
  for (std::size_t j = 0; j < dim; ++j) os << ",x_" << j + 1;
  os << '\n';
  for (const auto& r : trace) {
    os << r.step << ',' << r.level + 1 << ',' << static_cast<int>(r.move) << ',' << (r.accepted ? 1 : 0);
    for (double v : r.x) os << ',' << format_double(v);
    os << '\n';
  }
}

inline json run_params_to_json(const RunConfig& c) {
  return {{"eta", c.run.eta},          {"T", c.run.T},
          {"t", c.run.t},              {"m", c.run.m},
          {"delta", c.run.delta},      {"max_retries", c.run.max_retries},
          {"samples", c.run.samples},  {"c1", c.c1},
          {"c2", c.c2},                {"proposal_mode", to_string(c.proposal_mode)}};
}

inline json estimates_to_json(const TemperatureLadder& ladder, const PartitionEstimates& zhat, const RunConfig& c) {
  json j;
  j["version"] = 1;
  j["betas"] = ladder.betas;
  j["log_zhat"] = zhat.log_zhat;
  j["seed"] = c.run.seed;
  j["params"] = run_params_to_json(c);
  if (c.target) j["target"] = target_to_json(*c.target);
  return j;
}

struct SavedEstimates {
  std::vector<double> betas;
  PartitionEstimates estimates;
};

inline SavedEstimates load_estimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open estimates file '" + path + "'");
  SavedEstimates s;
  try {
    json j;
    in >> j;
    s.betas = j.at("betas").get<std::vector<double>>();
    s.estimates.log_zhat = j.at("log_zhat").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError("estimates file '" + path + "' is malformed: " + e.what());
  }
  try {
    s.estimates.validate();
  } catch (const Error& e) {
    throw ConfigError("estimates file '" + path + "': " + e.what());
  }
  if (s.betas.size() != s.estimates.size()) throw ConfigError("estimates file has mismatched betas and log_zhat");
  return s;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace stlmc::cli
