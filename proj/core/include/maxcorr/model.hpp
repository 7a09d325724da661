#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxcorr/dataset.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {

enum class RegressionDirection { y_on_x, x_on_y };

/// Straight line between the two composites. For y_on_x the line is
/// Y = slope * X + intercept; for x_on_y it is X = slope * Y + intercept.
struct LineModel {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  RegressionDirection direction = RegressionDirection::y_on_x;
};

/// OLS of the Y composite on the X composite, with intercept.
LineModel regress_y_on_x(const Dataset& ds, const WeightPair& w);

/// OLS of the X composite on the Y composite. Not equivalent to
/// regress_y_on_x unless the composites are perfectly correlated.
LineModel regress_x_on_y(const Dataset& ds, const WeightPair& w);

/// The fitted single equation written over the original variables:
///   sum_j y_coeff_j * y_j = sum_i x_coeff_i * x_i + constant + residual
/// with x_coeff = slope * a (Y-on-X form). Each coefficient keeps the term
/// that computes its column from raw inputs, so derived columns are
/// recomputed at prediction time.
struct ExpandedModel {
  struct Coefficient {
    std::string name;
    double value = 0.0;
    std::shared_ptr<const Term> term;
  };

  std::vector<Coefficient> y_coeffs;
  std::vector<Coefficient> x_coeffs;
  double constant = 0.0;

  // Provenance.
  double fit_correlation = 0.0;
  LineModel line;

  /// Raw input variables that predictions need.
  std::vector<std::string> required_x_inputs() const;
};

/// Expands a line fitted on the composites of `w` over the dataset's active
/// columns. An x_on_y line is first rewritten in Y-on-X form.
ExpandedModel expand(const LineModel& line, const WeightPair& w, const Dataset& ds,
                     double fit_correlation);

using InputRow = std::map<std::string, double, std::less<>>;

/// Expected Y composite for one row of raw x-side inputs.
double predict_expected_y(const ExpandedModel& model, const InputRow& x_row);

/// Actual minus expected Y composite, per row of `ds` (matched by name).
Eigen::VectorXd residual_scores(const Dataset& ds, const ExpandedModel& model);

}  // namespace maxcorr
