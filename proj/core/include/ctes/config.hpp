#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctes/dqn.hpp"
#include "ctes/plant.hpp"
#include "ctes/sizing.hpp"
#include "ctes/trace.hpp"

namespace ctes {

inline constexpr std::string_view kVersion = "0.1.0";

// Fully resolved run configuration. Every CLI command starts from built-in
// defaults, overlays the JSON config document, then applies flag overrides;
// the result is echoed verbatim into the provenance block.
struct RunConfig {
  // trace: either a CSV path or synthetic-generator parameters
  std::string trace_path;          // empty means synthetic
  SyntheticParams synthetic;
  PlantSpec plant;
  EconomicParams economics;
  TrainConfig train;
  std::vector<CandidateSizing> candidates;
  std::string sweep_policy = "dqn";
  double penalty_lambda = -1.0;    // <0 derives the default
  double e_init = 0.0;
  int dp_soc_nodes = 101;
  std::uint64_t seed = 0;
};

// Parses the JSON config document (all sections optional).
// Throws ParameterError for malformed documents or invalid values.
RunConfig parse_run_config(const std::string& json_text);

RunConfig load_run_config(const std::string& path);

// Canonical JSON form of a resolved configuration (sorted keys).
std::string run_config_to_json(const RunConfig& config);

// FNV-1a hash of the canonical config text; recorded in provenance.
std::uint64_t config_hash(const std::string& canonical_json);

// Provenance block written next to every command's outputs: command name,
// resolved configuration, seed, version, and any extra command inputs.
std::string provenance_json(const std::string& command, const RunConfig& config,
                            const std::map<std::string, std::string>& extras);

// Loads the trace named by the configuration (CSV path or generator).
Trace resolve_trace(const RunConfig& config);

}  // namespace ctes
