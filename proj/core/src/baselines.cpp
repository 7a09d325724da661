#include "maxcorr/baselines.hpp"

#include <cmath>
#include <limits>

#include "maxcorr/error.hpp"

namespace maxcorr {
namespace {

struct Ols {
  Eigen::VectorXd beta;  // regressor coefficients, intercept last
};

Ols ols_with_intercept(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& target) {
  const Eigen::Index n = regressors.rows();
  Eigen::MatrixXd design(n, regressors.cols() + 1);
  design << regressors, Eigen::VectorXd::Ones(n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    throw_data("least-squares design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
               " < " + std::to_string(design.cols()) + ")");
  }
  return {qr.solve(target)};
}

Eigen::MatrixXd drop_column(const Eigen::MatrixXd& m, Eigen::Index k) {
  Eigen::MatrixXd out(m.rows(), m.cols() - 1);
  out << m.leftCols(k), m.rightCols(m.cols() - k - 1);
  return out;
}

Eigen::VectorXd insert_entry(const Eigen::VectorXd& v, Eigen::Index k, double value) {
  Eigen::VectorXd out(v.size() + 1);
  out << v.head(k), value, v.tail(v.size() - k);
  return out;
}

std::string coefficient_name(const Dataset& ds, Eigen::Index index) {
  const auto nx = static_cast<Eigen::Index>(ds.n_active(Side::x));
  if (index < nx) return "a." + ds.active_names(Side::x)[static_cast<std::size_t>(index)];
  return "b." + ds.active_names(Side::y)[static_cast<std::size_t>(index - nx)];
}

std::string describe(const Dataset& ds, const Normalization& norm) {
  if (norm.kind == Normalization::Kind::sum_to_one) {
    return norm.side == Side::x ? "sum(a)=1" : "sum(b)=1";
  }
  return coefficient_name(ds, norm.index) + "=1";
}

Eigen::VectorXd unit_direction(const WeightPair& w) {
  Eigen::VectorXd v = w.concatenated();
  const double norm = v.norm();
  if (!(norm > 0.0)) return v;
  v /= norm;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

Dataset scale_column(const Dataset& ds, const std::string& column, double factor) {
  std::vector<Column> cols(ds.columns().begin(), ds.columns().end());
  for (auto& c : cols) {
    if (c.name == column) {
      for (auto& v : c.values) v *= factor;
    }
  }
  return Dataset(std::move(cols));
}

// Position of `column` in the concatenated active weights, if active.
std::optional<Eigen::Index> weight_index(const Dataset& ds, const std::string& column) {
  const auto nx = static_cast<Eigen::Index>(ds.n_active(Side::x));
  const auto xs = ds.active_names(Side::x);
  const auto ys = ds.active_names(Side::y);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == column) return static_cast<Eigen::Index>(i);
  }
  for (std::size_t j = 0; j < ys.size(); ++j) {
    if (ys[j] == column) return nx + static_cast<Eigen::Index>(j);
  }
  return std::nullopt;
}

WeightPair compensate(const WeightPair& w, Eigen::Index index, double factor) {
  Eigen::VectorXd v = w.concatenated();
  v(index) *= factor;
  return WeightPair::split(v, w.a.size());
}

}  // namespace

Eigen::VectorXd LsModel::residuals(const Dataset& ds) const {
  auto c = composites(ds, weights);
  return c.y - c.x - Eigen::VectorXd::Constant(c.x.size(), intercept);
}

LsModel fit_least_squares(const Dataset& ds, Eigen::Index normalized) {
  return fit_least_squares(ds, Normalization::fix(normalized, 1.0));
}

LsModel fit_least_squares(const Dataset& ds, const Normalization& norm) {
  const Eigen::MatrixXd x = ds.matrix(Side::x);
  const Eigen::MatrixXd y = ds.matrix(Side::y);
  const Eigen::Index nx = x.cols();
  const Eigen::Index ny = y.cols();
  if (nx == 0 || ny == 0) throw_data("least squares needs at least one active column per side");

  LsModel m;
  m.normalization = norm;
  if (norm.kind == Normalization::Kind::fix_coefficient) {
    if (norm.value != 1.0) throw_config("least-squares normalization fixes a coefficient to 1");
    const Eigen::Index k = norm.index;
    if (k < 0 || k >= nx + ny) throw_config("normalized coefficient index out of range");
    if (k >= nx) {
      // b_k = 1:  y_k = sum a x - sum_{j!=k} b_j y_j + c + e
      const Eigen::Index j = k - nx;
      Eigen::MatrixXd reg(x.rows(), nx + ny - 1);
      reg << x, drop_column(y, j);
      const Ols fit = ols_with_intercept(reg, y.col(j));
      m.weights.a = fit.beta.head(nx);
      m.weights.b = insert_entry(-fit.beta.segment(nx, ny - 1), j, 1.0);
      m.intercept = fit.beta(nx + ny - 1);
    } else {
      // a_k = 1:  x_k = sum b y - sum_{i!=k} a_i x_i - c - e
      Eigen::MatrixXd reg(x.rows(), nx + ny - 1);
      reg << y, drop_column(x, k);
      const Ols fit = ols_with_intercept(reg, x.col(k));
      m.weights.b = fit.beta.head(ny);
      m.weights.a = insert_entry(-fit.beta.segment(ny, nx - 1), k, 1.0);
      m.intercept = -fit.beta(nx + ny - 1);
    }
  } else if (norm.side == Side::y) {
    // b_0 = 1 - sum_{j>0} b_j:  y_0 = sum_{j>0} b_j (y_0 - y_j) + sum a x + c + e
    Eigen::MatrixXd reg(x.rows(), ny - 1 + nx);
    for (Eigen::Index j = 1; j < ny; ++j) reg.col(j - 1) = y.col(0) - y.col(j);
    reg.rightCols(nx) = x;
    const Ols fit = ols_with_intercept(reg, y.col(0));
    m.weights.b.resize(ny);
    m.weights.b.tail(ny - 1) = fit.beta.head(ny - 1);
    m.weights.b(0) = 1.0 - m.weights.b.tail(ny - 1).sum();
    m.weights.a = fit.beta.segment(ny - 1, nx);
    m.intercept = fit.beta(ny - 1 + nx);
  } else {
    // a_0 = 1 - sum_{i>0} a_i:  x_0 = sum b y - sum_{i>0} a_i (x_i - x_0) - c - e
    Eigen::MatrixXd reg(x.rows(), ny + nx - 1);
    reg.leftCols(ny) = y;
    for (Eigen::Index i = 1; i < nx; ++i) reg.col(ny + i - 1) = x.col(i) - x.col(0);
    const Ols fit = ols_with_intercept(reg, x.col(0));
    m.weights.b = fit.beta.head(ny);
    m.weights.a.resize(nx);
    m.weights.a.tail(nx - 1) = -fit.beta.segment(ny, nx - 1);
    m.weights.a(0) = 1.0 - m.weights.a.tail(nx - 1).sum();
    m.intercept = -fit.beta(ny + nx - 1);
  }

  m.sse = m.residuals(ds).squaredNorm();
  const auto c = composites(ds, m.weights);
  m.achieved_correlation = (is_degenerate(c.x) || is_degenerate(c.y))
                               ? std::numeric_limits<double>::quiet_NaN()
                               : pearson(c.x, c.y);
  return m;
}

double model_divergence(const WeightPair& lhs, const WeightPair& rhs) {
  if (lhs.a.size() != rhs.a.size() || lhs.b.size() != rhs.b.size()) {
    throw_config("cannot compare models with different weight dimensions");
  }
  return (unit_direction(lhs) - unit_direction(rhs)).norm();
}

ComparisonReport compare_normalizations(const Dataset& ds, const SolverConfig& cfg) {
  const auto total = static_cast<Eigen::Index>(ds.n_active(Side::x) + ds.n_active(Side::y));
  if (total < 2) throw_data("comparison needs at least two coefficients");
  ComparisonReport report;
  for (Eigen::Index k = 0; k < total; ++k) {
    NormalizationFit fit;
    fit.index = k;
    fit.coefficient = coefficient_name(ds, k);
    try {
      fit.model = fit_least_squares(ds, k);
    } catch (const Error& e) {
      fit.error = e.what();
    }
    report.fits.push_back(std::move(fit));
  }
  report.divergence = Eigen::MatrixXd::Constant(total, total, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < total; ++i) {
    for (Eigen::Index j = 0; j < total; ++j) {
      const auto& fi = report.fits[static_cast<std::size_t>(i)].model;
      const auto& fj = report.fits[static_cast<std::size_t>(j)].model;
      if (fi && fj) report.divergence(i, j) = model_divergence(fi->weights, fj->weights);
    }
  }
  report.maxcorr = maximize(ds, {}, Normalization::fix(0), cfg);
  return report;
}

ProbeReport scale_invariance_probe(const Dataset& ds, const std::string& column, double factor,
                                   const SolverConfig& cfg) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw_config("scale factor must be positive");
  if (factor == 1.0) throw_config("scale factor must differ from 1");
  if (!ds.find(column)) throw_config("unknown column '" + column + "'");
  const auto index = weight_index(ds, column);
  if (!index) throw_data("column '" + column + "' is constant and carries no weight");

  const Dataset scaled = scale_column(ds, column, factor);
  const auto total = static_cast<Eigen::Index>(ds.n_active(Side::x) + ds.n_active(Side::y));

  ProbeReport report;
  report.column = column;
  report.factor = factor;

  std::vector<Normalization> norms;
  for (Eigen::Index k = 0; k < total; ++k) norms.push_back(Normalization::fix(k));
  if (ds.n_active(Side::x) > 1) norms.push_back(Normalization::sum_to_one(Side::x));
  if (ds.n_active(Side::y) > 1) norms.push_back(Normalization::sum_to_one(Side::y));

  const Side column_side = ds.column(column).side;
  for (const auto& norm : norms) {
    ProbeEntry entry;
    entry.method = "least_squares";
    entry.normalization = describe(ds, norm);
    entry.normalizes_scaled_column = norm.kind == Normalization::Kind::fix_coefficient
                                         ? norm.index == *index
                                         : norm.side == column_side;
    try {
      const LsModel before = fit_least_squares(ds, norm);
      const LsModel after = fit_least_squares(scaled, norm);
      entry.before = before.weights;
      entry.after = compensate(after.weights, *index, factor);
      entry.divergence = model_divergence(entry.before, entry.after);
      entry.correlation_before = before.achieved_correlation;
      entry.correlation_after = after.achieved_correlation;
    } catch (const Error&) {
      continue;
    }
    report.least_squares.push_back(std::move(entry));
  }

  // Maxcorr with the normalization on a coefficient unrelated to the column.
  const Eigen::Index fixed = *index == 0 ? total - 1 : 0;
  const Normalization norm = Normalization::fix(fixed);
  const FitResult before = maximize(ds, {}, norm, cfg);
  const FitResult after = maximize(scaled, {}, norm, cfg);
  ProbeEntry& mc = report.maxcorr;
  mc.method = "maxcorr";
  mc.normalization = describe(ds, norm);
  mc.before = before.weights;
  mc.after = compensate(after.weights, *index, factor);
  mc.divergence = model_divergence(mc.before, mc.after);
  mc.correlation_before = before.correlation;
  mc.correlation_after = after.correlation;
  return report;
}

LineModel orthogonal_line_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw_data("orthogonal fit needs two equal-length vectors with at least 3 points");
  }
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().mean();
  const double syy = dy.square().mean();
  const double sxy = (dx * dy).mean();
  const double scale = sxx + syy;
  if (!(scale > 0.0)) throw_data("orthogonal fit: all points coincide (zero total variance)");

  // Principal axis of [[sxx, sxy], [sxy, syy]].
  const double diff = syy - sxx;
  const double disc = std::hypot(diff, 2.0 * sxy);
  if (disc <= 1e-14 * scale) throw_data("orthogonal fit: isotropic scatter has no principal axis");
  double vx = 0.0;
  double vy = 0.0;
  if (diff <= 0.0) {
    // Dominant horizontal spread: use the form that is stable when sxy -> 0.
    vx = (sxx - syy + disc);
    vy = 2.0 * sxy;
  } else {
    vx = 2.0 * sxy;
    vy = (syy - sxx + disc);
  }
  if (std::abs(vx) <= 1e-14 * std::abs(vy)) throw_data("orthogonal fit: principal axis is vertical");

  LineModel line;
  line.slope = vy / vx;
  line.intercept = y.mean() - line.slope * x.mean();
  line.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return line;
}

}  // namespace maxcorr
