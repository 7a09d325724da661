#include "maxcorr/model.hpp"

#include <algorithm>
#include <cmath>

#include "maxcorr/error.hpp"

namespace maxcorr {
namespace {

LineModel ols_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y, RegressionDirection dir) {
  if (is_degenerate(x)) throw_data("cannot regress on a zero-variance composite");
  const double r = pearson(x, y);
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  LineModel line;
  line.slope = (dx * dy).sum() / dx.square().sum();
  line.intercept = y.mean() - line.slope * x.mean();
  line.r_squared = r * r;
  line.direction = dir;
  return line;
}

Eigen::VectorXd column_values(const Dataset& ds, const std::string& name) {
  auto idx = ds.find(name);
  if (!idx) throw_data("dataset lacks column '" + name + "' required by the model");
  const auto& v = ds.columns()[*idx].values;
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

LineModel regress_y_on_x(const Dataset& ds, const WeightPair& w) {
  auto c = composites(ds, w);
  return ols_line(c.x, c.y, RegressionDirection::y_on_x);
}

LineModel regress_x_on_y(const Dataset& ds, const WeightPair& w) {
  auto c = composites(ds, w);
  return ols_line(c.y, c.x, RegressionDirection::x_on_y);
}

std::vector<std::string> ExpandedModel::required_x_inputs() const {
  std::vector<std::string> out;
  for (const auto& c : x_coeffs) {
    for (auto& name : c.term->inputs()) {
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    }
  }
  return out;
}

ExpandedModel expand(const LineModel& line, const WeightPair& w, const Dataset& ds,
                     double fit_correlation) {
  if (w.a.size() != static_cast<Eigen::Index>(ds.n_active(Side::x)) ||
      w.b.size() != static_cast<Eigen::Index>(ds.n_active(Side::y))) {
    throw_config("weights do not match the dataset's active columns");
  }
  double slope = line.slope;
  double intercept = line.intercept;
  if (line.direction == RegressionDirection::x_on_y) {
    // X = s Y + c  <=>  Y = X / s - c / s
    if (slope == 0.0) throw_data("cannot invert an x-on-y line with zero slope");
    intercept = -intercept / slope;
    slope = 1.0 / slope;
  }
  ExpandedModel m;
  const auto& cols = ds.columns();
  const auto& ax = ds.active(Side::x);
  const auto& ay = ds.active(Side::y);
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const auto& col = cols[ax[i]];
    m.x_coeffs.push_back({col.name, slope * w.a(static_cast<Eigen::Index>(i)), col.term});
  }
  for (std::size_t j = 0; j < ay.size(); ++j) {
    const auto& col = cols[ay[j]];
    m.y_coeffs.push_back({col.name, w.b(static_cast<Eigen::Index>(j)), col.term});
  }
  m.constant = intercept;
  m.fit_correlation = fit_correlation;
  m.line = line;
  return m;
}

double predict_expected_y(const ExpandedModel& model, const InputRow& x_row) {
  double total = model.constant;
  for (const auto& c : model.x_coeffs) total += c.value * c.term->evaluate(x_row);
  return total;
}

Eigen::VectorXd residual_scores(const Dataset& ds, const ExpandedModel& model) {
  const auto n = static_cast<Eigen::Index>(ds.n_rows());
  Eigen::VectorXd actual = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd expected = Eigen::VectorXd::Constant(n, model.constant);
  for (const auto& c : model.y_coeffs) actual += c.value * column_values(ds, c.name);
  for (const auto& c : model.x_coeffs) expected += c.value * column_values(ds, c.name);
  return actual - expected;
}

}  // namespace maxcorr
