#pragma once

#include <Eigen/Dense>

#include "maxcorr/dataset.hpp"

namespace maxcorr {

/// Coefficients of the x-side composite (a) and the y-side composite (b),
/// indexed by the dataset's active columns on each side.
struct WeightPair {
  Eigen::VectorXd a;
  Eigen::VectorXd b;

  Eigen::Index size() const { return a.size() + b.size(); }
  Eigen::VectorXd concatenated() const;
  static WeightPair split(const Eigen::VectorXd& w, Eigen::Index n_x);
};

struct CompositePair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// True when the standard deviation of `v` is below 1e-12 * (mean |v| + 1).
bool is_degenerate(const Eigen::Ref<const Eigen::VectorXd>& v);

CompositePair composites(const Dataset& ds, const WeightPair& w);

/// Pearson correlation (population moments). Throws Error(data) when either
/// vector is degenerate or the lengths differ or are below 3.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y);

double correlation_of_weights(const Dataset& ds, const WeightPair& w);

/// d corr / d(a, b), computed from the data.
WeightPair correlation_gradient(const Dataset& ds, const WeightPair& w);

/// Population mean, standard deviation and correlation matrix of the active
/// columns (x-side first, then y-side).
///
/// The solver, the eigen oracle and the integer search all work on this
/// standardized form: composite correlation only depends on second moments,
/// and unit-variance columns keep the optimization well scaled.
class StandardizedMoments {
 public:
  explicit StandardizedMoments(const Dataset& ds);

  Eigen::Index n_x() const { return n_x_; }
  Eigen::Index n_y() const { return n_y_; }
  Eigen::Index size() const { return n_x_ + n_y_; }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& sd() const { return sd_; }
  const Eigen::MatrixXd& corr() const { return corr_; }

  auto rxx() const { return corr_.topLeftCorner(n_x_, n_x_); }
  auto ryy() const { return corr_.bottomRightCorner(n_y_, n_y_); }
  auto rxy() const { return corr_.topRightCorner(n_x_, n_y_); }

  /// Raw-unit weights -> standardized-unit weights (w_k * sd_k).
  Eigen::VectorXd to_standard(const Eigen::VectorXd& w) const;
  /// Standardized-unit weights -> raw-unit weights (w_k / sd_k).
  Eigen::VectorXd from_standard(const Eigen::VectorXd& w) const;

  /// Composite correlation for concatenated standardized weights; NaN when
  /// either composite has (relative) zero variance.
  double correlation(const Eigen::VectorXd& w) const;

  /// Same as correlation(); also writes the analytic gradient.
  double correlation(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const;

 private:
  Eigen::Index n_x_ = 0;
  Eigen::Index n_y_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd sd_;
  Eigen::MatrixXd corr_;
};

}  // namespace maxcorr
