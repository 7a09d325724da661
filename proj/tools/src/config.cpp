#include "maxcorr_cli/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "maxcorr/error.hpp"
#include "maxcorr/serialize.hpp"

namespace maxcorr::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;
namespace io = maxcorr::json;

double number_at(const json& j, const char* key, std::string_view where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw_config(std::string(where) + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw_config(std::string(where) + "." + key + " must be finite");
  return d;
}

std::int64_t integer_at(const json& j, const char* key, std::string_view where) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw_config(std::string(where) + "." + key + " must be an integer");
  return v.get<std::int64_t>();
}

std::string string_at(const json& j, const char* key, std::string_view where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw_config(std::string(where) + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<std::string> names_at(const json& j, const char* key) {
  if (!j.contains(key)) throw_config(std::string("config needs '") + key + "', a list of column names");
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw_config(std::string("'") + key + "' must be a non-empty array");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw_config(std::string("'") + key + "' entries must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

DerivedSpec parse_derived(const json& j) {
  io::reject_unknown_keys(j, {"kind", "sources", "name", "constant"}, "derived entry");
  if (!j.contains("kind")) throw_config("derived entry needs 'kind'");
  DerivedSpec d;
  d.kind = transform_kind_from_string(string_at(j, "kind", "derived"));
  if (!j.contains("sources") || !j.at("sources").is_array() || j.at("sources").empty()) {
    throw_config("derived entry needs a non-empty 'sources' array");
  }
  for (const auto& s : j.at("sources")) {
    if (!s.is_string()) throw_config("derived sources must be column names");
    d.sources.push_back(s.get<std::string>());
  }
  if (j.contains("name")) d.name = string_at(j, "name", "derived");
  if (j.contains("constant")) d.constant = number_at(j, "constant", "derived");
  if (d.kind != TransformKind::sign_flip && d.name.empty()) {
    throw_config("derived " + std::string(to_string(d.kind)) + " column needs a 'name'");
  }
  return d;
}

SolverConfig parse_solver(const json& j) {
  io::reject_unknown_keys(
      j, {"convergence", "patience", "max_iterations", "n_starts", "seed", "gradient_tolerance"},
      "solver");
  SolverConfig s;
  if (j.contains("convergence")) s.convergence = number_at(j, "convergence", "solver");
  if (j.contains("patience")) s.patience = static_cast<int>(integer_at(j, "patience", "solver"));
  if (j.contains("max_iterations")) {
    s.max_iterations = static_cast<int>(integer_at(j, "max_iterations", "solver"));
  }
  if (j.contains("n_starts")) s.n_starts = static_cast<int>(integer_at(j, "n_starts", "solver"));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw_config("solver.seed must be a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("gradient_tolerance")) {
    s.gradient_tolerance = number_at(j, "gradient_tolerance", "solver");
  }
  s.validate();
  return s;
}

ResonanceOptions parse_resonance(const json& j) {
  io::reject_unknown_keys(j, {"bound", "top_k", "ceiling", "threshold"}, "resonance");
  ResonanceOptions r;
  if (j.contains("bound")) r.search.bound = static_cast<int>(integer_at(j, "bound", "resonance"));
  if (j.contains("top_k")) {
    const auto k = integer_at(j, "top_k", "resonance");
    if (k < 1) throw_config("resonance.top_k must be at least 1");
    r.search.top_k = static_cast<std::size_t>(k);
  }
  if (j.contains("ceiling")) r.search.ceiling = number_at(j, "ceiling", "resonance");
  if (j.contains("threshold")) {
    r.threshold = number_at(j, "threshold", "resonance");
    if (!(*r.threshold >= 0.0 && *r.threshold <= 0.5)) {
      throw_config("resonance.threshold must lie in [0, 0.5]");
    }
  }
  if (r.search.bound < 1) throw_config("resonance.bound must be at least 1");
  if (!(r.search.ceiling >= 1.0)) throw_config("resonance.ceiling must be at least 1");
  return r;
}

ProbeOptions parse_probe(const json& j) {
  io::reject_unknown_keys(j, {"column", "factor"}, "probe");
  ProbeOptions p;
  if (j.contains("column")) p.column = string_at(j, "column", "probe");
  if (j.contains("factor")) p.factor = number_at(j, "factor", "probe");
  if (!(p.factor > 0.0)) throw_config("probe.factor must be positive");
  return p;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_config("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw_config("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

RunConfig parse_run_config(const json& input, const std::string& base_dir) {
  const json& j = input.is_object() && input.contains("config") && input.contains("command")
                      ? input.at("config")
                      : input;
  io::reject_unknown_keys(j,
                            {"data", "x", "y", "derived", "constraints", "normalization", "solver",
                             "target", "direction", "resonance", "probe"},
                            "config");
  RunConfig cfg;
  if (j.contains("data")) {
    fs::path p = string_at(j, "data", "config");
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    cfg.data = p.string();
  }
  cfg.roles.x = names_at(j, "x");
  cfg.roles.y = names_at(j, "y");
  if (j.contains("derived")) {
    if (!j.at("derived").is_array()) throw_config("'derived' must be an array");
    for (const auto& d : j.at("derived")) cfg.roles.derived.push_back(parse_derived(d));
  }
  if (j.contains("constraints")) {
    if (!j.at("constraints").is_array()) throw_config("'constraints' must be an array");
    cfg.constraints = j.at("constraints");
  }
  if (j.contains("normalization")) cfg.normalization = j.at("normalization");
  if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
  if (j.contains("target")) {
    cfg.target = number_at(j, "target", "config");
    if (!(*cfg.target > -1.0 && *cfg.target < 1.0)) throw_config("target must lie in (-1, 1)");
  }
  if (j.contains("direction")) {
    const auto d = string_at(j, "direction", "config");
    if (d == "y_on_x") {
      cfg.direction = RegressionDirection::y_on_x;
    } else if (d == "x_on_y") {
      cfg.direction = RegressionDirection::x_on_y;
    } else {
      throw_config("direction must be 'y_on_x' or 'x_on_y'");
    }
  }
  if (j.contains("resonance")) cfg.resonance = parse_resonance(j.at("resonance"));
  if (j.contains("probe")) cfg.probe = parse_probe(j.at("probe"));
  return cfg;
}

Resolved resolve(RunConfig cfg) {
  if (cfg.data.empty()) throw_config("no data file: set 'data' in the config or pass --data");
  cfg.data = fs::absolute(fs::path(cfg.data)).lexically_normal().string();
  Dataset ds = apply_derived(load_csv(cfg.data, cfg.roles.role_map()), cfg.roles.derived);
  if (ds.n_active(Side::x) == 0 || ds.n_active(Side::y) == 0) {
    throw_data("every column on one side is constant; nothing to weight");
  }
  auto constraints = io::parse_constraints(cfg.constraints, ds);
  Normalization norm = cfg.normalization ? io::parse_normalization(*cfg.normalization, ds)
                                         : Normalization::fix(0);
  if (cfg.probe.column && !ds.find(*cfg.probe.column)) {
    throw_config("probe.column '" + *cfg.probe.column + "' is not a column");
  }
  return Resolved{std::move(cfg), std::move(ds), std::move(constraints), norm};
}

json to_json(const Resolved& r) {
  const RunConfig& c = r.config;
  json derived = json::array();
  for (const auto& d : c.roles.derived) {
    json e = {{"kind", std::string(to_string(d.kind))}, {"sources", d.sources}};
    if (!d.name.empty()) e["name"] = d.name;
    if (d.constant != 0.0) e["constant"] = d.constant;
    derived.push_back(std::move(e));
  }
  json out = {
      {"data", c.data},
      {"x", c.roles.x},
      {"y", c.roles.y},
      {"derived", std::move(derived)},
      {"constraints", c.constraints},
      {"normalization", io::normalization(r.dataset, r.normalization)},
      {"solver",
       {{"convergence", c.solver.convergence},
        {"patience", c.solver.patience},
        {"max_iterations", c.solver.max_iterations},
        {"n_starts", c.solver.n_starts},
        {"seed", c.solver.seed},
        {"gradient_tolerance", c.solver.gradient_tolerance}}},
      {"direction", c.direction == RegressionDirection::y_on_x ? "y_on_x" : "x_on_y"},
  };
  if (c.target) out["target"] = *c.target;
  json res = {{"bound", c.resonance.search.bound},
              {"top_k", c.resonance.search.top_k},
              {"ceiling", c.resonance.search.ceiling}};
  if (c.resonance.threshold) res["threshold"] = *c.resonance.threshold;
  out["resonance"] = std::move(res);
  json probe = {{"factor", c.probe.factor}};
  if (c.probe.column) probe["column"] = *c.probe.column;
  out["probe"] = std::move(probe);
  return out;
}

}  // namespace maxcorr::cli
