#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace maxcorr {

enum class Side { x, y };

std::string_view to_string(Side side);

enum class TransformKind { square, log, product, sign_flip, shift };

std::string_view to_string(TransformKind kind);
TransformKind transform_kind_from_string(std::string_view name);

/// Expression describing how a column is computed from raw input variables.
///
/// Raw columns are leaves (`kind` empty, `input` set). Derived columns apply
/// `kind` to their argument terms. Keeping the full tree, not just the
/// immediate sources, lets a fitted model recompute derived columns from raw
/// inputs even after in-place transforms such as sign flips.
struct Term {
  std::optional<TransformKind> kind;
  std::string input;
  double constant = 0.0;  // shift amount; unused by other kinds
  std::vector<std::shared_ptr<const Term>> args;

  static std::shared_ptr<const Term> leaf(std::string name);

  /// Evaluates the term given raw input values. Throws Error(data) for a
  /// missing input or a log of a non-positive value.
  double evaluate(const std::map<std::string, double, std::less<>>& inputs) const;

  /// Names of the raw inputs this term depends on, in first-seen order.
  std::vector<std::string> inputs() const;
};

/// Record of the transform that produced a column.
struct Lineage {
  TransformKind kind;
  std::vector<std::string> sources;
  double constant = 0.0;
};

struct Column {
  std::string name;
  Side side = Side::x;
  std::vector<double> values;
  std::optional<Lineage> lineage;
  std::shared_ptr<const Term> term;

  /// True when the column has (numerically) zero variance.
  bool is_constant() const;
};

/// Immutable table of named columns, each tagged as x-side or y-side.
///
/// Constant columns are kept in the table but excluded from composites; the
/// "active" accessors below list only the columns that carry weights.
class Dataset {
 public:
  explicit Dataset(std::vector<Column> columns);

  std::size_t n_rows() const { return n_rows_; }
  std::span<const Column> columns() const { return columns_; }

  std::optional<std::size_t> find(std::string_view name) const;
  const Column& column(std::string_view name) const;

  /// Indices (into columns()) of the non-constant columns on one side.
  const std::vector<std::size_t>& active(Side side) const {
    return side == Side::x ? active_x_ : active_y_;
  }
  std::vector<std::string> active_names(Side side) const;
  std::size_t n_active(Side side) const { return active(side).size(); }

  /// Names of constant columns that were excluded from composites.
  std::vector<std::string> excluded() const;

  /// Active columns of one side as an n_rows x n_active matrix.
  Eigen::MatrixXd matrix(Side side) const;

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
  std::vector<std::size_t> active_x_;
  std::vector<std::size_t> active_y_;
};

/// Side assignment for every CSV header.
using RoleMap = std::map<std::string, Side, std::less<>>;

struct DerivedSpec {
  TransformKind kind;
  std::vector<std::string> sources;
  std::string name;  // ignored for sign_flip, which acts in place
  double constant = 0.0;
};

/// Role/derivation configuration: which headers are x-side and y-side, plus
/// derived columns appended in order.
struct Roles {
  std::vector<std::string> x;
  std::vector<std::string> y;
  std::vector<DerivedSpec> derived;

  RoleMap role_map() const;
};

/// Numeric CSV table: a header row, then one value per column per row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

CsvTable parse_csv_table(std::string_view text);
CsvTable load_csv_table(const std::string& path);

Dataset load_csv(const std::string& path, const RoleMap& roles);
Dataset parse_csv(std::string_view text, const RoleMap& roles);

/// Returns a new dataset with one appended column computed element-wise from
/// `sources`. The side is inherited from the sources.
Dataset add_derived(const Dataset& ds, TransformKind kind,
                    std::span<const std::string> sources,
                    const std::string& new_name, double constant = 0.0);

/// Returns a new dataset where `column` is negated in place.
Dataset sign_flip(const Dataset& ds, std::string_view column);

/// Applies every entry of roles.derived in order.
Dataset apply_derived(const Dataset& ds, std::span<const DerivedSpec> derived);

}  // namespace maxcorr
