#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "socdist/calibration.hpp"
#include "socdist/evaluator.hpp"
#include "socdist/pipeline.hpp"

namespace socdist {

/// Every tunable, resolved from defaults, then a config file, then flags.
struct RunConfig {
  PipelineConfig pipeline;
  double known_width_m = kDefaultKnownWidthM;
  double match_gate_px = kDefaultMatchGatePx;
  std::uint64_t seed = 0;
};

/// Keys accepted by the config file; flags use the same names.
const std::vector<std::string>& config_keys();

/// Sets one key. Throws ParameterError for an unknown key or unparsable value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// `key = value` lines; `#` starts a comment; blank lines are ignored.
void apply_config_text(RunConfig& config, const std::string& text);
void apply_config_file(RunConfig& config, const std::string& path);

/// Rejects out-of-range values (threshold <= 0, min_score outside [0,1], ...).
void validate(const RunConfig& config);

}  // namespace socdist
