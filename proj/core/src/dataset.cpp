#include "maxcorr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "maxcorr/error.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {

std::string_view to_string(Side side) { return side == Side::x ? "x" : "y"; }

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::square: return "square";
    case TransformKind::log: return "log";
    case TransformKind::product: return "product";
    case TransformKind::sign_flip: return "sign_flip";
    case TransformKind::shift: return "shift";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(std::string_view name) {
  for (auto kind : {TransformKind::square, TransformKind::log, TransformKind::product,
                    TransformKind::sign_flip, TransformKind::shift}) {
    if (to_string(kind) == name) return kind;
  }
  throw_config("unknown transform kind '" + std::string(name) + "'");
}

std::shared_ptr<const Term> Term::leaf(std::string name) {
  auto term = std::make_shared<Term>();
  term->input = std::move(name);
  return term;
}

double Term::evaluate(const std::map<std::string, double, std::less<>>& inputs) const {
  if (!kind) {
    auto it = inputs.find(input);
    if (it == inputs.end()) throw_data("missing value for variable '" + input + "'");
    return it->second;
  }
  switch (*kind) {
    case TransformKind::square: {
      double v = args.at(0)->evaluate(inputs);
      return v * v;
    }
    case TransformKind::log: {
      double v = args.at(0)->evaluate(inputs);
      if (!(v > 0.0)) {
        throw_data("log transform of non-positive value " + std::to_string(v));
      }
      return std::log(v);
    }
    case TransformKind::product:
      return args.at(0)->evaluate(inputs) * args.at(1)->evaluate(inputs);
    case TransformKind::sign_flip:
      return -args.at(0)->evaluate(inputs);
    case TransformKind::shift:
      return args.at(0)->evaluate(inputs) + constant;
  }
  return 0.0;
}

std::vector<std::string> Term::inputs() const {
  std::vector<std::string> out;
  auto visit = [&out](const Term& t, auto&& self) -> void {
    if (!t.kind) {
      if (std::find(out.begin(), out.end(), t.input) == out.end()) out.push_back(t.input);
      return;
    }
    for (const auto& arg : t.args) self(*arg, self);
  };
  visit(*this, visit);
  return out;
}

bool Column::is_constant() const {
  return is_degenerate(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                         static_cast<Eigen::Index>(values.size())));
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw_data("dataset has no columns");
  n_rows_ = columns_.front().values.size();
  if (n_rows_ < 3) {
    throw_data("too few rows: " + std::to_string(n_rows_) + " (need at least 3)");
  }
  std::set<std::string, std::less<>> seen;
  bool any_x = false;
  bool any_y = false;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    auto& col = columns_[i];
    if (col.values.size() != n_rows_) {
      throw_data("column '" + col.name + "' has " + std::to_string(col.values.size()) +
                 " values, expected " + std::to_string(n_rows_));
    }
    if (!seen.insert(col.name).second) throw_data("duplicate column name '" + col.name + "'");
    for (double v : col.values) {
      if (!std::isfinite(v)) throw_data("column '" + col.name + "' contains a non-finite value");
    }
    if (!col.term) col.term = Term::leaf(col.name);
    (col.side == Side::x ? any_x : any_y) = true;
    if (!col.is_constant()) (col.side == Side::x ? active_x_ : active_y_).push_back(i);
  }
  if (!any_x) throw_data("dataset has no x-side column");
  if (!any_y) throw_data("dataset has no y-side column");
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

const Column& Dataset::column(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw_data("unknown column '" + std::string(name) + "'");
  return columns_[*idx];
}

std::vector<std::string> Dataset::active_names(Side side) const {
  std::vector<std::string> names;
  for (auto i : active(side)) names.push_back(columns_[i].name);
  return names;
}

std::vector<std::string> Dataset::excluded() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& act = active(columns_[i].side);
    if (std::find(act.begin(), act.end(), i) == act.end()) names.push_back(columns_[i].name);
  }
  return names;
}

Eigen::MatrixXd Dataset::matrix(Side side) const {
  const auto& idx = active(side);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n_rows_), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& values = columns_[idx[j]].values;
    for (std::size_t i = 0; i < n_rows_; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i];
    }
  }
  return m;
}

RoleMap Roles::role_map() const {
  RoleMap map;
  for (const auto& name : x) map[name] = Side::x;
  for (const auto& name : y) {
    if (map.count(name)) throw_config("column '" + name + "' assigned to both sides");
    map[name] = Side::y;
  }
  return map;
}

Dataset add_derived(const Dataset& ds, TransformKind kind, std::span<const std::string> sources,
                    const std::string& new_name, double constant) {
  const std::size_t arity = kind == TransformKind::product ? 2 : 1;
  if (sources.size() != arity) {
    throw_config(std::string(to_string(kind)) + " expects " + std::to_string(arity) +
                 " source column(s), got " + std::to_string(sources.size()));
  }
  if (ds.find(new_name)) throw_config("derived column name '" + new_name + "' already exists");

  std::vector<const Column*> src;
  for (const auto& name : sources) src.push_back(&ds.column(name));
  if (kind == TransformKind::product && src[0]->side != src[1]->side) {
    throw_config("product of '" + sources[0] + "' and '" + sources[1] +
                 "' mixes x-side and y-side columns");
  }
  if (kind == TransformKind::shift && !std::isfinite(constant)) {
    throw_config("shift constant must be finite");
  }

  Column out;
  out.name = new_name;
  out.side = src[0]->side;
  out.values.resize(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const double v = src[0]->values[i];
    switch (kind) {
      case TransformKind::square: out.values[i] = v * v; break;
      case TransformKind::log:
        if (!(v > 0.0)) {
          throw_data("log of non-positive value " + std::to_string(v) + " in column '" +
                     sources[0] + "' at row " + std::to_string(i + 1));
        }
        out.values[i] = std::log(v);
        break;
      case TransformKind::product: out.values[i] = v * src[1]->values[i]; break;
      case TransformKind::sign_flip: out.values[i] = -v; break;
      case TransformKind::shift: out.values[i] = v + constant; break;
    }
  }
  out.lineage = Lineage{kind, {sources.begin(), sources.end()}, constant};
  auto term = std::make_shared<Term>();
  term->kind = kind;
  term->constant = constant;
  for (const auto* s : src) term->args.push_back(s->term);
  out.term = std::move(term);

  std::vector<Column> cols(ds.columns().begin(), ds.columns().end());
  cols.push_back(std::move(out));
  return Dataset(std::move(cols));
}

Dataset sign_flip(const Dataset& ds, std::string_view column) {
  auto idx = ds.find(column);
  if (!idx) throw_config("cannot flip unknown column '" + std::string(column) + "'");
  std::vector<Column> cols(ds.columns().begin(), ds.columns().end());
  auto& col = cols[*idx];
  for (auto& v : col.values) v = -v;
  auto term = std::make_shared<Term>();
  term->kind = TransformKind::sign_flip;
  term->args.push_back(col.term);
  col.term = std::move(term);
  col.lineage = Lineage{TransformKind::sign_flip, {col.name}, 0.0};
  return Dataset(std::move(cols));
}

Dataset apply_derived(const Dataset& ds, std::span<const DerivedSpec> derived) {
  Dataset out = ds;
  for (const auto& spec : derived) {
    if (spec.kind == TransformKind::sign_flip && (spec.name.empty() || spec.name == spec.sources.at(0))) {
      if (spec.sources.size() != 1) throw_config("sign_flip expects exactly one source column");
      out = sign_flip(out, spec.sources.front());
    } else {
      out = add_derived(out, spec.kind, spec.sources, spec.name, spec.constant);
    }
  }
  return out;
}

}  // namespace maxcorr
