#include "maxcorr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maxcorr/error.hpp"

namespace maxcorr {
namespace {

constexpr double kDegenerateTol = 1e-12;

void check_dims(const Dataset& ds, const WeightPair& w) {
  const auto nx = static_cast<Eigen::Index>(ds.n_active(Side::x));
  const auto ny = static_cast<Eigen::Index>(ds.n_active(Side::y));
  if (w.a.size() != nx || w.b.size() != ny) {
    throw_config("weight dimensions (" + std::to_string(w.a.size()) + ", " +
                 std::to_string(w.b.size()) + ") do not match active columns (" +
                 std::to_string(nx) + ", " + std::to_string(ny) + ")");
  }
}

}  // namespace

Eigen::VectorXd WeightPair::concatenated() const {
  Eigen::VectorXd w(size());
  w << a, b;
  return w;
}

WeightPair WeightPair::split(const Eigen::VectorXd& w, Eigen::Index n_x) {
  return {w.head(n_x), w.tail(w.size() - n_x)};
}

bool is_degenerate(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) return true;
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().mean());
  return sd < kDegenerateTol * (v.cwiseAbs().mean() + 1.0);
}

CompositePair composites(const Dataset& ds, const WeightPair& w) {
  check_dims(ds, w);
  return {ds.matrix(Side::x) * w.a, ds.matrix(Side::y) * w.b};
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw_data("pearson: vectors differ in length");
  if (x.size() < 3) throw_data("pearson: need at least 3 observations");
  if (is_degenerate(x) || is_degenerate(y)) {
    throw_data("pearson: zero variance composite (degenerate weights)");
  }
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double r = (dx * dy).sum() / std::sqrt(dx.square().sum() * dy.square().sum());
  return std::clamp(r, -1.0, 1.0);
}

double correlation_of_weights(const Dataset& ds, const WeightPair& w) {
  auto c = composites(ds, w);
  return pearson(c.x, c.y);
}

WeightPair correlation_gradient(const Dataset& ds, const WeightPair& w) {
  check_dims(ds, w);
  Eigen::MatrixXd xs = ds.matrix(Side::x);
  Eigen::MatrixXd ys = ds.matrix(Side::y);
  xs.rowwise() -= xs.colwise().mean();
  ys.rowwise() -= ys.colwise().mean();
  const Eigen::VectorXd cx = xs * w.a;
  const Eigen::VectorXd cy = ys * w.b;
  if (is_degenerate(cx) || is_degenerate(cy)) {
    throw_data("correlation_gradient: zero variance composite (degenerate weights)");
  }
  // r = u / sqrt(vx vy) with u = cx.cy, vx = |cx|^2, vy = |cy|^2 (the 1/n cancels).
  const double u = cx.dot(cy);
  const double vx = cx.squaredNorm();
  const double vy = cy.squaredNorm();
  const double s = std::sqrt(vx * vy);
  const double r = u / s;
  WeightPair g;
  g.a = xs.transpose() * cy / s - r * (xs.transpose() * cx) / vx;
  g.b = ys.transpose() * cx / s - r * (ys.transpose() * cy) / vy;
  return g;
}

StandardizedMoments::StandardizedMoments(const Dataset& ds)
    : n_x_(static_cast<Eigen::Index>(ds.n_active(Side::x))),
      n_y_(static_cast<Eigen::Index>(ds.n_active(Side::y))) {
  if (n_x_ == 0 || n_y_ == 0) {
    throw_data("every column on the " + std::string(n_x_ == 0 ? "x" : "y") +
               "-side is constant; no composite can be formed");
  }
  Eigen::MatrixXd data(static_cast<Eigen::Index>(ds.n_rows()), size());
  data << ds.matrix(Side::x), ds.matrix(Side::y);
  mean_ = data.colwise().mean().transpose();
  data.rowwise() -= mean_.transpose();
  const double n = static_cast<double>(ds.n_rows());
  sd_ = (data.colwise().squaredNorm().transpose() / n).cwiseSqrt();
  data = data * sd_.cwiseInverse().asDiagonal();
  corr_ = data.transpose() * data / n;
  corr_.diagonal().setOnes();
}

Eigen::VectorXd StandardizedMoments::to_standard(const Eigen::VectorXd& w) const {
  return w.cwiseProduct(sd_);
}

Eigen::VectorXd StandardizedMoments::from_standard(const Eigen::VectorXd& w) const {
  return w.cwiseQuotient(sd_);
}

double StandardizedMoments::correlation(const Eigen::VectorXd& w) const {
  const auto a = w.head(n_x_);
  const auto b = w.tail(n_y_);
  const double va = a.dot(rxx() * a);
  const double vb = b.dot(ryy() * b);
  const double ta = kDegenerateTol * a.cwiseAbs().sum();
  const double tb = kDegenerateTol * b.cwiseAbs().sum();
  if (!(va > ta * ta) || !(vb > tb * tb) || va <= 0.0 || vb <= 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return a.dot(rxy() * b) / std::sqrt(va * vb);
}

double StandardizedMoments::correlation(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const {
  const double r = correlation(w);
  grad.resize(size());
  if (std::isnan(r)) {
    grad.setZero();
    return r;
  }
  const auto a = w.head(n_x_);
  const auto b = w.tail(n_y_);
  const Eigen::VectorXd sxx_a = rxx() * a;
  const Eigen::VectorXd syy_b = ryy() * b;
  const double va = a.dot(sxx_a);
  const double vb = b.dot(syy_b);
  const double s = std::sqrt(va * vb);
  grad.head(n_x_) = rxy() * b / s - r * sxx_a / va;
  grad.tail(n_y_) = rxy().transpose() * a / s - r * syy_b / vb;
  return r;
}

}  // namespace maxcorr
