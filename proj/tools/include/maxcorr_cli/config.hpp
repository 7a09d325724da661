#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxcorr/dataset.hpp"
#include "maxcorr/model.hpp"
#include "maxcorr/resonance.hpp"
#include "maxcorr/solver.hpp"

namespace maxcorr::cli {

struct ProbeOptions {
  std::optional<std::string> column;  // defaults to the first active x column
  double factor = 10.0;
};

struct ResonanceOptions {
  IntegerSearchConfig search;
  std::optional<double> threshold;  // enables the nearest-integer report
};

/// Run configuration as read from JSON, before the data is loaded. Key
/// checks and type checks happen here; name checks need the dataset.
struct RunConfig {
  std::string data;  // absolute path once resolved
  Roles roles;
  nlohmann::json constraints = nlohmann::json::array();
  std::optional<nlohmann::json> normalization;
  SolverConfig solver;
  std::optional<double> target;
  RegressionDirection direction = RegressionDirection::y_on_x;
  ResonanceOptions resonance;
  ProbeOptions probe;
};

/// Accepts either a bare config or an artifact carrying one under "config".
/// Relative data paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir);

nlohmann::json read_json_file(const std::string& path);

/// Config with the data set loaded and every reference checked.
struct Resolved {
  RunConfig config;
  Dataset dataset;
  std::vector<LinearConstraint> constraints;
  Normalization normalization;
};

Resolved resolve(RunConfig cfg);

/// Canonical JSON of a resolved config with every default filled in;
/// parsing it back yields the same run.
nlohmann::json to_json(const Resolved& r);

}  // namespace maxcorr::cli
