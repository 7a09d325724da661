#include "maxcorr/feasible_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maxcorr/error.hpp"

namespace maxcorr {
namespace {

constexpr double kActiveTol = 1e-10;
constexpr double kInfeasibleTol = 1e-8;

void append_row(Eigen::MatrixXd& m, Eigen::VectorXd& rhs, const Eigen::VectorXd& row, double b) {
  m.conservativeResize(m.rows() + 1, Eigen::NoChange);
  m.row(m.rows() - 1) = row.transpose();
  rhs.conservativeResize(rhs.size() + 1);
  rhs(rhs.size() - 1) = b;
}

// Working set of independent constraint rows; index < 0 encodes equality -i-1.
class WorkingSet {
 public:
  explicit WorkingSet(const FeasibleRegion& region) : region_(region) { rebuild(); }

  const Eigen::MatrixXd& null_space() const { return z_; }
  const std::vector<int>& members() const { return members_; }

  bool contains(int id) const {
    return std::find(members_.begin(), members_.end(), id) != members_.end();
  }

  // Adds the row if it is independent of the current members.
  bool add(int id) {
    if (contains(id)) return false;
    Eigen::VectorXd r = row(id);
    if (z_.cols() == 0 || (z_.transpose() * r).norm() <= 1e-10) return false;
    members_.push_back(id);
    rebuild();
    return true;
  }

  void remove(int id) {
    members_.erase(std::remove(members_.begin(), members_.end(), id), members_.end());
    rebuild();
  }

  Eigen::VectorXd row(int id) const {
    return id < 0 ? Eigen::VectorXd(region_.equality_rows().row(-id - 1).transpose())
                  : Eigen::VectorXd(region_.inequality_rows().row(id).transpose());
  }

  // Least-squares multipliers lambda with A^T lambda = g.
  Eigen::VectorXd multipliers(const Eigen::VectorXd& g) const {
    if (members_.empty()) return {};
    Eigen::MatrixXd at(region_.dim(), static_cast<Eigen::Index>(members_.size()));
    for (std::size_t j = 0; j < members_.size(); ++j) at.col(static_cast<Eigen::Index>(j)) = row(members_[j]);
    return at.colPivHouseholderQr().solve(g);
  }

 private:
  void rebuild() {
    const Eigen::Index n = region_.dim();
    const auto m = static_cast<Eigen::Index>(members_.size());
    if (m == 0) {
      z_ = Eigen::MatrixXd::Identity(n, n);
      return;
    }
    Eigen::MatrixXd at(n, m);
    for (Eigen::Index j = 0; j < m; ++j) at.col(j) = row(members_[static_cast<std::size_t>(j)]);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(at);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    z_ = q.rightCols(n - m);
  }

  const FeasibleRegion& region_;
  std::vector<int> members_;
  Eigen::MatrixXd z_;
};

double stationarity(const Eigen::VectorXd& w, const Eigen::VectorXd& pg, Eigen::Index split) {
  if (split <= 0 || split >= w.size()) return pg.norm() * std::max(1.0, w.norm());
  const double ga = pg.head(split).norm() * w.head(split).norm();
  const double gb = pg.tail(w.size() - split).norm() * w.tail(w.size() - split).norm();
  return std::hypot(ga, gb);
}

// Powell-damped BFGS update of a positive definite model of the Hessian of -f.
void bfgs_update(Eigen::MatrixXd& b, const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  const Eigen::VectorXd bs = b * s;
  const double sbs = s.dot(bs);
  if (!(sbs > 1e-300)) return;
  const double sy = s.dot(y);
  const double theta = sy >= 0.2 * sbs ? 1.0 : 0.8 * sbs / (sbs - sy);
  const Eigen::VectorXd r = theta * y + (1.0 - theta) * bs;
  const double sr = s.dot(r);
  if (!(sr > 1e-300)) return;
  b += r * r.transpose() / sr - bs * bs.transpose() / sbs;
}

}  // namespace

void FeasibleRegion::add_equality(const Eigen::VectorXd& row, double rhs) {
  const double norm = row.norm();
  if (row.size() != dim_ || !(norm > 0.0)) throw_config("constraint row is empty or has wrong length");
  append_row(eq_, eq_rhs_, row / norm, rhs / norm);
}

void FeasibleRegion::add_inequality(const Eigen::VectorXd& row, double rhs) {
  const double norm = row.norm();
  if (row.size() != dim_ || !(norm > 0.0)) throw_config("constraint row is empty or has wrong length");
  append_row(ineq_, ineq_rhs_, row / norm, rhs / norm);
}

double FeasibleRegion::max_violation(const Eigen::VectorXd& w) const {
  double worst = 0.0;
  if (eq_.rows() > 0) worst = (eq_ * w - eq_rhs_).cwiseAbs().maxCoeff();
  if (ineq_.rows() > 0) worst = std::max(worst, (ineq_rhs_ - ineq_ * w).maxCoeff());
  return worst;
}

std::optional<Eigen::VectorXd> FeasibleRegion::project(const Eigen::VectorXd& w0) const {
  constexpr double kProx = 1e-10;
  const Eigen::Index n = dim_;
  auto phi = [&](const Eigen::VectorXd& w) {
    double v = 0.5 * kProx * (w - w0).squaredNorm();
    if (eq_.rows() > 0) v += 0.5 * (eq_ * w - eq_rhs_).squaredNorm();
    if (ineq_.rows() > 0) v += 0.5 * (ineq_ * w - ineq_rhs_).cwiseMin(0.0).squaredNorm();
    return v;
  };

  // Semismooth Newton on the piecewise quadratic phase-1 objective.
  Eigen::VectorXd w = w0;
  for (int it = 0; it < 200; ++it) {
    Eigen::MatrixXd h = kProx * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd grad = kProx * (w - w0);
    if (eq_.rows() > 0) {
      h += eq_.transpose() * eq_;
      grad += eq_.transpose() * (eq_ * w - eq_rhs_);
    }
    for (Eigen::Index i = 0; i < ineq_.rows(); ++i) {
      const double res = ineq_.row(i).dot(w) - ineq_rhs_(i);
      if (res < 0.0) {
        h += ineq_.row(i).transpose() * ineq_.row(i);
        grad += ineq_.row(i).transpose() * res;
      }
    }
    if (grad.norm() <= 1e-18 * (1.0 + w.norm())) break;
    const Eigen::VectorXd step = -h.ldlt().solve(grad);
    const double phi0 = phi(w);
    const double slope = grad.dot(step);
    double t = 1.0;
    while (t > 1e-12 && phi(w + t * step) > phi0 + 1e-4 * t * slope) t *= 0.5;
    w += t * step;
    if ((t * step).norm() <= 1e-16 * (1.0 + w.norm())) break;
  }

  // Snap onto the nearly active rows so equalities hold to rounding error.
  for (int round = 0; round < 5 && max_violation(w) > 1e-13; ++round) {
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (Eigen::Index i = 0; i < eq_.rows(); ++i) {
      rows.push_back(eq_.row(i).transpose());
      rhs.push_back(eq_rhs_(i));
    }
    for (Eigen::Index i = 0; i < ineq_.rows(); ++i) {
      if (ineq_.row(i).dot(w) - ineq_rhs_(i) <= 1e-9) {
        rows.push_back(ineq_.row(i).transpose());
        rhs.push_back(ineq_rhs_(i));
      }
    }
    if (rows.empty()) break;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), n);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
      b(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    w += a.completeOrthogonalDecomposition().solve(b - a * w);
  }

  if (!w.allFinite() || max_violation(w) > kInfeasibleTol) return std::nullopt;
  return w;
}

AscentResult active_set_ascent(const FeasibleRegion& region, const Objective& objective,
                               Eigen::VectorXd w0, const AscentOptions& options,
                               const std::function<bool(double)>& done) {
  const Eigen::Index n = region.dim();
  AscentResult out;
  out.w = std::move(w0);

  Eigen::VectorXd g(n);
  double f = objective(out.w, g);
  if (!std::isfinite(f)) throw_data("objective is undefined at the starting point");
  out.value = f;
  if (done && done(f)) {
    out.converged = true;
    return out;
  }

  WorkingSet ws(region);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(region.n_equalities()); ++i) {
    ws.add(static_cast<int>(-i - 1));
  }
  const Eigen::MatrixXd& ineq = region.inequality_rows();
  const Eigen::VectorXd& ineq_rhs = region.inequality_rhs();
  for (Eigen::Index i = 0; i < ineq.rows(); ++i) {
    if (ineq.row(i).dot(out.w) - ineq_rhs(i) <= kActiveTol) ws.add(static_cast<int>(i));
  }

  Eigen::MatrixXd model = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  int window = 0;
  int releases = 0;
  const int max_releases = 50 * static_cast<int>(ineq.rows() + 1);

  auto kkt = [&](bool& released) {
    released = false;
    const Eigen::MatrixXd& z = ws.null_space();
    const Eigen::VectorXd pg = z * (z.transpose() * g);
    if (stationarity(out.w, pg, options.split) > options.gradient_tolerance) return false;
    if (releases >= max_releases) return true;
    const Eigen::VectorXd lambda = ws.multipliers(g);
    const double scale = std::max(1.0, out.w.norm());
    int worst = -1;
    double worst_value = 1e-9;
    for (std::size_t j = 0; j < ws.members().size(); ++j) {
      const int id = ws.members()[j];
      if (id < 0) continue;
      const double value = lambda(static_cast<Eigen::Index>(j)) * scale;
      if (value > worst_value) {
        worst_value = value;
        worst = id;
      }
    }
    if (worst >= 0) {
      ws.remove(worst);
      ++releases;
      released = true;
      return false;
    }
    return true;
  };

  while (out.iterations < options.max_iterations) {
    ++out.iterations;
    bool released = false;
    if (kkt(released)) {
      if (++window >= options.patience) {
        out.converged = true;
        break;
      }
      continue;
    }
    if (released) continue;

    const Eigen::MatrixXd& zz = ws.null_space();
    const Eigen::VectorXd gzz = zz.transpose() * g;
    Eigen::VectorXd d;
    if (!fresh) {
      const Eigen::MatrixXd reduced = zz.transpose() * model * zz;
      d = zz * reduced.ldlt().solve(gzz);
    }
    if (fresh || !d.allFinite() || !(g.dot(d) > 0.0)) {
      model.setIdentity();
      fresh = true;
      d = zz * gzz;
    }
    const double dnorm = d.norm();
    if (!(dnorm > 0.0)) {
      if (++window >= options.patience) break;
      continue;
    }

    // Ratio test against inactive inequalities.
    double alpha_max = std::numeric_limits<double>::infinity();
    int blocking = -1;
    for (Eigen::Index i = 0; i < ineq.rows(); ++i) {
      if (ws.contains(static_cast<int>(i))) continue;
      const double ad = ineq.row(i).dot(d);
      if (ad >= -1e-14 * dnorm) continue;
      const double res = std::max(0.0, ineq.row(i).dot(out.w) - ineq_rhs(i));
      const double alpha = res / -ad;
      if (alpha < alpha_max) {
        alpha_max = alpha;
        blocking = static_cast<int>(i);
      }
    }
    if (blocking >= 0 && alpha_max * dnorm <= 1e-14 * (1.0 + out.w.norm())) {
      if (!ws.add(blocking)) {
        // Dependent on the working set yet blocking: numerically active, skip it.
        alpha_max = std::numeric_limits<double>::infinity();
      } else {
        continue;
      }
    }

    double alpha = fresh ? 0.1 * std::max(1.0, out.w.norm()) / dnorm : 1.0;
    alpha = std::min(alpha, alpha_max);
    const double slope = g.dot(d);
    Eigen::VectorXd g_new(n);
    double f_new = std::numeric_limits<double>::quiet_NaN();
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      f_new = objective(out.w + alpha * d, g_new);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      if (std::isfinite(f_new)) {
        const double denom = 2.0 * (f + slope * alpha - f_new);
        double next = denom > 0.0 ? slope * alpha * alpha / denom : 0.5 * alpha;
        alpha = std::clamp(next, 0.1 * alpha, 0.5 * alpha);
      } else {
        alpha *= 0.1;
      }
    }
    if (!accepted) {
      if (!fresh) {
        model.setIdentity();
        fresh = true;
        continue;
      }
      // No ascent possible along the projected gradient: numerically stationary.
      if (++window >= options.patience) {
        bool ignored = false;
        out.converged = kkt(ignored);
        break;
      }
      continue;
    }

    const Eigen::VectorXd s = alpha * d;
    out.w += s;
    if (blocking >= 0 && alpha >= alpha_max) ws.add(blocking);
    const Eigen::VectorXd y = g - g_new;  // gradient change of -f
    if (fresh) {
      const double sy = s.dot(y);
      if (sy > 0.0) model = (y.squaredNorm() / sy) * Eigen::MatrixXd::Identity(n, n);
      fresh = false;
    }
    bfgs_update(model, s, y);
    if (out.w.norm() > options.escape_norm) {
      out.value = f_new;
      out.escaped = true;
      return out;
    }

    const double rel = std::abs(f_new - f) / std::max(std::abs(f), 1e-300);
    f = f_new;
    g = g_new;
    out.value = f;
    if (done && done(f)) {
      out.converged = true;
      break;
    }
    window = rel < options.convergence ? window + 1 : 0;
    if (window >= options.patience) {
      bool rel_released = false;
      if (kkt(rel_released)) {
        out.converged = true;
        break;
      }
      window = 0;
    }
  }
  out.value = f;
  return out;
}

}  // namespace maxcorr
