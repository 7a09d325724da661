#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace maxcorr {

/// Polyhedron { w : E w = e, G w >= g } with unit-norm rows.
class FeasibleRegion {
 public:
  explicit FeasibleRegion(Eigen::Index dim)
      : dim_(dim), eq_(0, dim), eq_rhs_(0), ineq_(0, dim), ineq_rhs_(0) {}

  Eigen::Index dim() const { return dim_; }

  /// Adds row . w == rhs. Rows are rescaled to unit norm; a zero row throws.
  void add_equality(const Eigen::VectorXd& row, double rhs);
  /// Adds row . w >= rhs.
  void add_inequality(const Eigen::VectorXd& row, double rhs);

  std::size_t n_equalities() const { return eq_rhs_.size(); }
  std::size_t n_inequalities() const { return ineq_rhs_.size(); }

  /// Largest violation over all rows (0 when feasible).
  double max_violation(const Eigen::VectorXd& w) const;
  bool contains(const Eigen::VectorXd& w, double tol = 1e-10) const {
    return max_violation(w) <= tol;
  }

  /// Phase-1 projection: minimizes the sum of squared violations starting
  /// from w0, with a vanishing proximal term so the result stays near w0.
  /// Returns nullopt when the smallest achievable violation exceeds 1e-8.
  std::optional<Eigen::VectorXd> project(const Eigen::VectorXd& w0) const;

  const Eigen::MatrixXd& equality_rows() const { return eq_; }
  const Eigen::VectorXd& equality_rhs() const { return eq_rhs_; }
  const Eigen::MatrixXd& inequality_rows() const { return ineq_; }
  const Eigen::VectorXd& inequality_rhs() const { return ineq_rhs_; }

 private:
  Eigen::Index dim_;
  Eigen::MatrixXd eq_;
  Eigen::VectorXd eq_rhs_;
  Eigen::MatrixXd ineq_;
  Eigen::VectorXd ineq_rhs_;
};

/// Objective callback: returns the value at w and writes the gradient.
/// A NaN value marks w as outside the objective's domain.
using Objective = std::function<double(const Eigen::VectorXd& w, Eigen::VectorXd& grad)>;

struct AscentOptions {
  double convergence = 1e-9;  // relative change threshold
  int patience = 5;           // consecutive iterations below the threshold
  int max_iterations = 10000;
  double gradient_tolerance = 1e-7;
  // Index where the second weight block starts. Stationarity is measured per
  // block as |projected gradient| * |block|, which is scale free for
  // objectives that are homogeneous of degree zero in each block.
  Eigen::Index split = 0;
  // Stop early once |w| exceeds this; used to catch runs that drift to
  // infinity along a scale-free direction.
  double escape_norm = std::numeric_limits<double>::infinity();
};

struct AscentResult {
  Eigen::VectorXd w;
  double value = 0.0;
  bool converged = false;  // stopping rule met at a KKT point
  bool escaped = false;    // |w| exceeded escape_norm
  int iterations = 0;
};

/// Maximizes `objective` over `region` from the feasible point w0.
///
/// Gradient projection with an active working set: each step follows the
/// gradient projected onto the null space of the working constraints,
/// preconditioned by a damped BFGS model of the reduced Hessian. Steps are
/// clipped at the first blocking inequality (which then joins the working
/// set) and sized by a quadratic-interpolation backtracking line search.
/// Inequalities whose multipliers have the wrong sign are released.
///
/// Stops when the relative objective change stays below `convergence` for
/// `patience` consecutive iterations and the point passes the KKT check, or
/// when `done(value)` returns true.
AscentResult active_set_ascent(const FeasibleRegion& region, const Objective& objective,
                               Eigen::VectorXd w0, const AscentOptions& options,
                               const std::function<bool(double)>& done = {});

}  // namespace maxcorr
