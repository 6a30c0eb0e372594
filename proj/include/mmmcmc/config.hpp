#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmmcmc/harness.hpp"

namespace mmmcmc {

/// Parses a JSON experiment config. Parse and schema errors throw ConfigError
/// with a file:line anchor. Unknown keys are rejected.
ExperimentConfig load_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name);

/// Canonical JSON form (used for hashing and golden tests).
std::string config_to_json(const ExperimentConfig& cfg);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Structural cross-checks against the chosen model: referential integrity of
/// free-energy/reconstruction names, required sampler fields, domain sanity.
/// Runs before any sampling.
ValidationReport validate_config(const ExperimentConfig& cfg);

/// Dry-run numeric checks: gradient finite-difference spot check on random
/// states, N_lambda grid adequacy, inner-step stability heuristics.
ValidationReport validate_numerics(const ExperimentConfig& cfg,
                                   int spot_checks = 10);

}  // namespace mmmcmc
