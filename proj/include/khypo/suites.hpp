#pragma once

#include "khypo/config.hpp"
#include "khypo/report.hpp"

#include <string>
#include <vector>

namespace khypo {

// Subcommand pipelines. Thresholds come from the config sections (defaults in the README).
RunReport suite_verify_l2(const ExperimentConfig& cfg);
RunReport suite_verify_lp(const ExperimentConfig& cfg);
RunReport suite_mc_validate(const ExperimentConfig& cfg);
RunReport suite_boltzmann_check(const ExperimentConfig& cfg);
RunReport suite_geometry_check(const ExperimentConfig& cfg);
RunReport suite_sweep(const ExperimentConfig& cfg);
RunReport suite_symbol(const ExperimentConfig& cfg);

const std::vector<std::string>& suite_names();
// InvalidArgument for an unknown name.
RunReport run_suite(const std::string& name, const ExperimentConfig& cfg);

// Same path with every measure (and envelope) switched to exponent alpha.
CoefficientPath with_alpha(const CoefficientPath& path, double alpha);

}  // namespace khypo
