#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "lepskii/experiments.hpp"

namespace lepskii {

using Json = nlohmann::json;

/// Model document:
///   {"spectrum": {"type": "poly", "b": 2, "D": 1000} | {"type": "custom", "t": [...]},
///    "source":   {"type": "holder", "r": 0.5, "R": 1, "h": ...} | {"type": "index", "A": "log:1"},
///    "noise":    {"sigma": 0.3, "M": 0.3}}
/// h is "single", "spread" or an explicit array, inside "source" or at the top
/// level. M defaults to sigma.
SyntheticModel model_from_json(const Json& doc);

/// Experiment document: {"model": {...}, "n_values": [...], "replications",
/// "seed_base", "grid_q", "lambda0": {"method", "value"}, "heuristic":
/// {"threshold", "scale", "sigma"}, "balancing": {"eta", "sigma", "M", "c_s",
/// "constant_mode", "bal_factor"}, "filters": [...], "holdout_fraction",
/// "record_timing", "threads"}. Balancing sigma and M default to the model noise.
ExperimentConfig experiment_config_from_json(const Json& doc);

Json read_json_file(const std::string& path);

std::string_view to_string(ConstantMode mode);
ConstantMode parse_constant_mode(std::string_view name);

Json diagnostics_to_json(const BalancingDiagnostics& d, const BalancingConfig& cfg);
BalancingDiagnostics diagnostics_from_json(const Json& doc);

Json grid_to_json(const Grid& g);
Grid grid_from_json(const Json& doc);

Json rate_to_json(const RateFit& fit);
RateFit rate_from_json(const Json& doc);

Json summary_to_json(const std::vector<FilterSummary>& summaries);

/// nlohmann writes NaN as null; this reads it back.
double json_number(const Json& value);

}  // namespace lepskii
