#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/field.hpp"
#include "khypo/source.hpp"
#include "khypo/stable_levy.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace khypo {

using json = nlohmann::json;

struct ExperimentConfig {
    bool has_path = false;
    CoefficientPath path;
    bool has_source = false;
    SourceSpec source;
    std::vector<double> lambdas{1.0};
    std::vector<double> p_values{2.0};
    FieldGridSpec grid;  // grid.refine is the global quadrature multiplier (--quad-scale)
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    json raw;  // full document, for subcommand sections (monte_carlo, boltzmann, geometry, sweep, symbol)
};

// Throws ConfigError naming the offending key.
StableMeasure measure_from_json(const json& j);
json measure_to_json(const StableMeasure& m);
CoefficientPath path_from_json(const json& j);
SourceSpec source_from_json(const json& j, int dim);
ExperimentConfig config_from_json(const json& j);
// ConfigError with the path when the file is missing or malformed.
ExperimentConfig load_config(const std::string& path);
// ConfigError unless the config carries a coefficient path (and a source when `source` is set).
void require_path(const ExperimentConfig& c, bool source = false);
// Section of the raw document, or an empty object.
json section(const ExperimentConfig& c, const char* key);

// helpers shared by the subcommands
Vec vec_from_json(const json& j, const char* key);
Mat mat_from_json(const json& j, const char* key);
double get_or(const json& j, const char* key, double def);
int get_or(const json& j, const char* key, int def);

}  // namespace khypo
