#include "maxcorr/cca.hpp"

#include <algorithm>
#include <cmath>

#include "maxcorr/error.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {
namespace {

constexpr double kMaxCondition = 1e12;

// Eigen-decomposition of a within-set correlation block, rejecting
// near-singular (collinear) sets.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> checked_eigen(const Eigen::MatrixXd& r,
                                                            std::string_view side) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  if (es.info() != Eigen::Success) throw_data("eigen-decomposition failed on the " + std::string(side) + "-side");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw_data("the " + std::string(side) +
               "-side columns are collinear (within-set covariance is singular); "
               "drop or combine redundant columns");
  }
  return es;
}

}  // namespace

CcaSolution cca_first_pair(const Dataset& ds) {
  const StandardizedMoments m(ds);
  const auto ex = checked_eigen(m.rxx(), "x");
  const auto ey = checked_eigen(m.ryy(), "y");

  const Eigen::MatrixXd rxx_isqrt = ex.operatorInverseSqrt();
  const Eigen::MatrixXd ryy_inv =
      ey.eigenvectors() * ey.eigenvalues().cwiseInverse().asDiagonal() * ey.eigenvectors().transpose();
  const Eigen::MatrixXd rxy = m.rxy();

  Eigen::MatrixXd k = rxx_isqrt * rxy * ryy_inv * rxy.transpose() * rxx_isqrt;
  k = 0.5 * (k + k.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const Eigen::Index top = k.rows() - 1;  // eigenvalues are sorted ascending
  const double lambda = std::clamp(es.eigenvalues()(top), 0.0, 1.0);

  Eigen::VectorXd a = rxx_isqrt * es.eigenvectors().col(top);
  Eigen::VectorXd b = ryy_inv * rxy.transpose() * a;
  a /= std::sqrt(a.dot(m.rxx() * a));
  const double vb = b.dot(m.ryy() * b);
  if (vb > 0.0) {
    b /= std::sqrt(vb);
  } else {
    // rho == 0: any y composite is uncorrelated with X; take the first axis.
    b = Eigen::VectorXd::Unit(m.n_y(), 0);
  }

  CcaSolution sol;
  sol.a = a.cwiseQuotient(m.sd().head(m.n_x()));
  sol.b = b.cwiseQuotient(m.sd().tail(m.n_y()));
  sol.rho = std::sqrt(lambda);
  return sol;
}

double pearson_consistency_check(const Dataset& ds, const CcaSolution& sol) {
  return std::abs(correlation_of_weights(ds, {sol.a, sol.b})) - sol.rho;
}

}  // namespace maxcorr
