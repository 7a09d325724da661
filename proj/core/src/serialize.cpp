#include "maxcorr/serialize.hpp"

#include <cmath>
#include <set>

#include "maxcorr/error.hpp"

namespace maxcorr::json {
namespace {

double as_number(const json& j, std::string_view what) {
  if (!j.is_number()) throw_config(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw_config(std::string(what) + " must be finite");
  return v;
}

json named_vector(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  json out = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = number(v(static_cast<Eigen::Index>(i)));
  return out;
}

}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  if (!j.is_object()) throw_config(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw_config("unknown key '" + key + "' in " + std::string(where));
  }
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json weights(const Dataset& ds, const WeightPair& w) {
  if (w.a.size() == 0 && w.b.size() == 0) return nullptr;
  return {{"a", named_vector(ds.active_names(Side::x), w.a)},
          {"b", named_vector(ds.active_names(Side::y), w.b)}};
}

json fit_result(const Dataset& ds, const FitResult& res) {
  return {{"weights", weights(ds, res.weights)},
          {"correlation", number(res.correlation)},
          {"status", std::string(to_string(res.status))},
          {"starts_agreeing", res.starts_agreeing},
          {"starts_converged", res.starts_converged},
          {"iterations", res.iterations}};
}

json line_model(const LineModel& line) {
  return {{"slope", number(line.slope)},
          {"intercept", number(line.intercept)},
          {"r_squared", number(line.r_squared)},
          {"direction", line.direction == RegressionDirection::y_on_x ? "y_on_x" : "x_on_y"}};
}

json term(const Term& t) {
  if (!t.kind) return {{"input", t.input}};
  json args = json::array();
  for (const auto& a : t.args) args.push_back(term(*a));
  json out = {{"kind", std::string(to_string(*t.kind))}, {"args", args}};
  if (*t.kind == TransformKind::shift) out["constant"] = t.constant;
  return out;
}

std::shared_ptr<const Term> parse_term(const json& j) {
  reject_unknown_keys(j, {"input", "kind", "args", "constant"}, "term");
  if (j.contains("input")) return Term::leaf(j.at("input").get<std::string>());
  auto t = std::make_shared<Term>();
  t->kind = transform_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("constant")) t->constant = as_number(j.at("constant"), "term constant");
  for (const auto& a : j.at("args")) t->args.push_back(parse_term(a));
  const std::size_t arity = *t->kind == TransformKind::product ? 2 : 1;
  if (t->args.size() != arity) throw_config("term '" + std::string(to_string(*t->kind)) + "' has wrong arity");
  return t;
}

json expanded_model(const ExpandedModel& m) {
  json y = json::object(), x = json::object(), yt = json::object(), xt = json::object();
  for (const auto& c : m.y_coeffs) {
    y[c.name] = number(c.value);
    yt[c.name] = term(*c.term);
  }
  for (const auto& c : m.x_coeffs) {
    x[c.name] = number(c.value);
    xt[c.name] = term(*c.term);
  }
  return {{"y_coeffs", y},
          {"x_coeffs", x},
          {"constant", number(m.constant)},
          {"y_terms", yt},
          {"x_terms", xt},
          {"fit",
           {{"correlation", number(m.fit_correlation)},
            {"r_squared", number(m.line.r_squared)},
            {"line", line_model(m.line)}}}};
}

ExpandedModel parse_expanded_model(const json& j) {
  reject_unknown_keys(j, {"y_coeffs", "x_coeffs", "constant", "y_terms", "x_terms", "fit"}, "model");
  ExpandedModel m;
  auto read = [](const json& coeffs, const json* terms, std::vector<ExpandedModel::Coefficient>& out) {
    for (const auto& [name, value] : coeffs.items()) {
      ExpandedModel::Coefficient c;
      c.name = name;
      c.value = as_number(value, "model coefficient '" + name + "'");
      c.term = terms && terms->contains(name) ? parse_term(terms->at(name)) : Term::leaf(name);
      out.push_back(std::move(c));
    }
  };
  read(j.at("y_coeffs"), j.contains("y_terms") ? &j.at("y_terms") : nullptr, m.y_coeffs);
  read(j.at("x_coeffs"), j.contains("x_terms") ? &j.at("x_terms") : nullptr, m.x_coeffs);
  m.constant = as_number(j.at("constant"), "model constant");
  if (j.contains("fit")) {
    const auto& fit = j.at("fit");
    if (fit.contains("correlation") && fit.at("correlation").is_number()) {
      m.fit_correlation = fit.at("correlation").get<double>();
    }
    if (fit.contains("line")) {
      const auto& l = fit.at("line");
      m.line.slope = l.value("slope", 0.0);
      m.line.intercept = l.value("intercept", 0.0);
      m.line.r_squared = l.value("r_squared", 0.0);
      m.line.direction = l.value("direction", std::string("y_on_x")) == "x_on_y"
                             ? RegressionDirection::x_on_y
                             : RegressionDirection::y_on_x;
    }
  }
  return m;
}

json cca_solution(const Dataset& ds, const CcaSolution& sol) {
  return {{"rho", number(sol.rho)}, {"weights", weights(ds, {sol.a, sol.b})}};
}

json ls_model(const Dataset& ds, const LsModel& m) {
  return {{"weights", weights(ds, m.weights)},
          {"intercept", number(m.intercept)},
          {"normalization", normalization(ds, m.normalization)},
          {"sse", number(m.sse)},
          {"achieved_correlation", number(m.achieved_correlation)}};
}

json comparison_report(const Dataset& ds, const ComparisonReport& r) {
  json fits = json::array();
  std::vector<std::string> names;
  for (const auto& f : r.fits) {
    json entry = {{"normalized", f.coefficient}};
    if (f.model) {
      entry["model"] = ls_model(ds, *f.model);
    } else {
      entry["skipped"] = f.error;
    }
    fits.push_back(std::move(entry));
    names.push_back(f.coefficient);
  }
  json matrix = json::array();
  for (Eigen::Index i = 0; i < r.divergence.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.divergence.cols(); ++k) row.push_back(number(r.divergence(i, k)));
    matrix.push_back(std::move(row));
  }
  return {{"least_squares", fits},
          {"divergence", {{"labels", names}, {"matrix", matrix}}},
          {"maxcorr", fit_result(ds, r.maxcorr)}};
}

json probe_report(const Dataset& ds, const ProbeReport& r) {
  auto entry = [&ds](const ProbeEntry& e) {
    return json{{"method", e.method},
                {"normalization", e.normalization},
                {"normalizes_scaled_column", e.normalizes_scaled_column},
                {"before", weights(ds, e.before)},
                {"after", weights(ds, e.after)},
                {"divergence", number(e.divergence)},
                {"correlation_before", number(e.correlation_before)},
                {"correlation_after", number(e.correlation_after)}};
  };
  json ls = json::array();
  for (const auto& e : r.least_squares) ls.push_back(entry(e));
  return {{"column", r.column}, {"factor", r.factor}, {"least_squares", ls}, {"maxcorr", entry(r.maxcorr)}};
}

json resonance_hit(const Dataset& ds, const ResonanceHit& hit) {
  json a = json::object(), b = json::object();
  const auto xs = ds.active_names(Side::x);
  const auto ys = ds.active_names(Side::y);
  for (std::size_t i = 0; i < xs.size(); ++i) a[xs[i]] = hit.a[i];
  for (std::size_t j = 0; j < ys.size(); ++j) b[ys[j]] = hit.b[j];
  return {{"a", a}, {"b", b}, {"correlation", number(hit.correlation)}};
}

json nearest_integer_report(const NearestIntegerReport& r) {
  return {{"scale", number(r.scale)},
          {"scaled", r.scaled},
          {"nearest", r.nearest},
          {"distance", r.distance},
          {"candidate", r.candidate}};
}

Eigen::Index weight_index(const Dataset& ds, const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || (key.substr(0, dot) != "a" && key.substr(0, dot) != "b")) {
    throw_config("weight reference '" + key + "' must look like a.<x-column> or b.<y-column>");
  }
  const Side side = key[0] == 'a' ? Side::x : Side::y;
  const std::string name = key.substr(dot + 1);
  const auto idx = ds.find(name);
  if (!idx) throw_config("weight reference '" + key + "' names an unknown column");
  if (ds.columns()[*idx].side != side) {
    throw_config("weight reference '" + key + "' uses the wrong prefix for a " +
                 std::string(to_string(ds.columns()[*idx].side)) + "-side column");
  }
  const auto names = ds.active_names(side);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      return (side == Side::x ? 0 : static_cast<Eigen::Index>(ds.n_active(Side::x))) +
             static_cast<Eigen::Index>(i);
    }
  }
  throw_config("weight reference '" + key + "' names a constant column excluded from composites");
}

std::vector<LinearConstraint> parse_constraints(const json& j, const Dataset& ds) {
  if (!j.is_array()) throw_config("constraints must be a JSON array");
  const auto n = static_cast<Eigen::Index>(ds.n_active(Side::x) + ds.n_active(Side::y));
  std::vector<LinearConstraint> out;
  for (const auto& item : j) {
    reject_unknown_keys(item, {"coeffs", "relation", "rhs"}, "constraint");
    LinearConstraint c;
    c.coeffs = Eigen::VectorXd::Zero(n);
    if (!item.contains("coeffs") || !item.at("coeffs").is_object() || item.at("coeffs").empty()) {
      throw_config("constraint needs a non-empty 'coeffs' object");
    }
    for (const auto& [key, value] : item.at("coeffs").items()) {
      c.coeffs(weight_index(ds, key)) += as_number(value, "constraint coefficient '" + key + "'");
    }
    if (c.coeffs.isZero(0.0)) throw_config("constraint coefficients are all zero");
    if (!item.contains("relation") || !item.at("relation").is_string()) {
      throw_config("constraint needs a 'relation' string");
    }
    c.relation = relation_from_string(item.at("relation").get<std::string>());
    c.rhs = item.contains("rhs") ? as_number(item.at("rhs"), "constraint rhs") : 0.0;
    out.push_back(std::move(c));
  }
  return out;
}

Normalization parse_normalization(const json& j, const Dataset& ds) {
  reject_unknown_keys(j, {"fix", "value", "sum_to_one"}, "normalization");
  if (j.contains("fix") == j.contains("sum_to_one")) {
    throw_config("normalization needs exactly one of 'fix' or 'sum_to_one'");
  }
  if (j.contains("fix")) {
    const double value = j.contains("value") ? as_number(j.at("value"), "normalization value") : 1.0;
    if (value == 0.0) throw_config("normalization value must be nonzero");
    return Normalization::fix(weight_index(ds, j.at("fix").get<std::string>()), value);
  }
  if (j.contains("value")) throw_config("'value' only applies to a 'fix' normalization");
  const auto side = j.at("sum_to_one").get<std::string>();
  if (side == "a" || side == "x") return Normalization::sum_to_one(Side::x);
  if (side == "b" || side == "y") return Normalization::sum_to_one(Side::y);
  throw_config("sum_to_one must name side 'a' or 'b'");
}

json normalization(const Dataset& ds, const Normalization& norm) {
  if (norm.kind == Normalization::Kind::sum_to_one) {
    return {{"sum_to_one", norm.side == Side::x ? "a" : "b"}};
  }
  const auto nx = static_cast<Eigen::Index>(ds.n_active(Side::x));
  const std::string key = norm.index < nx
                              ? "a." + ds.active_names(Side::x)[static_cast<std::size_t>(norm.index)]
                              : "b." + ds.active_names(Side::y)[static_cast<std::size_t>(norm.index - nx)];
  return {{"fix", key}, {"value", norm.value}};
}

}  // namespace maxcorr::json
