#pragma once

#include <Eigen/Dense>

#include "maxcorr/dataset.hpp"

namespace maxcorr {

/// First canonical pair: raw-unit weights with unit composite variance and
/// the (non-negative) canonical correlation.
struct CcaSolution {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  double rho = 0.0;
};

/// Classical unconstrained CCA by symmetric eigen-decomposition of
/// Rxx^{-1/2} Rxy Ryy^{-1} Ryx Rxx^{-1/2} on the correlation matrix of the
/// active columns. Throws Error(data) naming the offending side when a
/// within-set correlation matrix has condition number above 1e12.
CcaSolution cca_first_pair(const Dataset& ds);

/// |correlation_of_weights(ds, (a, b))| - rho; near zero for a valid solution.
double pearson_consistency_check(const Dataset& ds, const CcaSolution& sol);

}  // namespace maxcorr
