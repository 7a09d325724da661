#pragma once

#include <initializer_list>
#include <memory>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxcorr/baselines.hpp"
#include "maxcorr/cca.hpp"
#include "maxcorr/dataset.hpp"
#include "maxcorr/model.hpp"
#include "maxcorr/resonance.hpp"
#include "maxcorr/solver.hpp"

// JSON forms of the library's file formats and report artifacts. Weight
// vectors are written as objects keyed by column name.
namespace maxcorr::json {

using nlohmann::json;

/// {"a": {name: weight}, "b": {...}} over the dataset's active columns.
json weights(const Dataset& ds, const WeightPair& w);

json fit_result(const Dataset& ds, const FitResult& res);
json line_model(const LineModel& line);
json term(const Term& t);
std::shared_ptr<const Term> parse_term(const json& j);

json expanded_model(const ExpandedModel& m);
ExpandedModel parse_expanded_model(const json& j);

json cca_solution(const Dataset& ds, const CcaSolution& sol);
json ls_model(const Dataset& ds, const LsModel& m);
json comparison_report(const Dataset& ds, const ComparisonReport& r);
json probe_report(const Dataset& ds, const ProbeReport& r);
json resonance_hit(const Dataset& ds, const ResonanceHit& hit);
json nearest_integer_report(const NearestIntegerReport& r);

/// Parses the constraint list format:
///   [{"coeffs": {"a.x1": 1, "b.y2": -1}, "relation": ">=", "rhs": 0}, ...]
/// Unreferenced weights get coefficient 0. Throws Error(config) on unknown
/// or constant columns, bad relations and unknown keys.
std::vector<LinearConstraint> parse_constraints(const json& j, const Dataset& ds);

/// {"fix": "b.y2", "value": 1} or {"sum_to_one": "a" | "b"}.
Normalization parse_normalization(const json& j, const Dataset& ds);
json normalization(const Dataset& ds, const Normalization& norm);

/// Index of "a.<name>" / "b.<name>" in the concatenated active weights.
Eigen::Index weight_index(const Dataset& ds, const std::string& key);

/// Throws Error(config) naming `where` if j is not an object or carries a
/// key outside `allowed`.
void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view where);

/// Plain double, or null for NaN / infinity (which JSON cannot carry).
json number(double v);

}  // namespace maxcorr::json
