#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maxcorr/dataset.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {

enum class Relation { le, eq, ge };

std::string_view to_string(Relation rel);
Relation relation_from_string(std::string_view text);

/// coeffs . (a, b) <relation> rhs, over the concatenated active weights.
struct LinearConstraint {
  Eigen::VectorXd coeffs;
  Relation relation = Relation::ge;
  double rhs = 0.0;
};

/// Scale-fixing condition that rules out the all-zero solution.
struct Normalization {
  enum class Kind { fix_coefficient, sum_to_one };

  Kind kind = Kind::fix_coefficient;
  Eigen::Index index = 0;  // fix_coefficient: position in (a, b)
  double value = 1.0;      // fix_coefficient: target value
  Side side = Side::x;     // sum_to_one: which weight vector sums to one

  static Normalization fix(Eigen::Index index, double value = 1.0) {
    return {Kind::fix_coefficient, index, value, Side::x};
  }
  static Normalization sum_to_one(Side side) { return {Kind::sum_to_one, 0, 1.0, side}; }

  /// Side whose scale this normalization pins down.
  Side pinned_side(Eigen::Index n_x) const {
    return kind == Kind::sum_to_one ? side : (index < n_x ? Side::x : Side::y);
  }
};

struct SolverConfig {
  double convergence = 1e-9;
  int patience = 5;
  int max_iterations = 10000;
  int n_starts = 10;
  std::uint64_t seed = 0;
  // Scale-free KKT threshold checked before a start is declared optimal.
  double gradient_tolerance = 1e-7;

  void validate() const;
};

enum class FitStatus { optimal, max_iterations, infeasible };

std::string_view to_string(FitStatus status);

/// Weights satisfy the normalization on one side; the other side is scaled
/// so both composites have equal standard deviation (when the constraints
/// allow), which keeps fitted weights equivariant under changes of units.
struct FitResult {
  WeightPair weights;
  double correlation = 0.0;
  FitStatus status = FitStatus::infeasible;
  int starts_agreeing = 0;  // starts within 1e-6 of the best value
  int starts_converged = 0;
  int iterations = 0;
};

/// Largest constraint violation of raw-unit weights, normalization included.
double max_violation(std::span<const LinearConstraint> constraints, const Normalization& norm,
                     const WeightPair& w);

/// Maximizes composite correlation subject to linear constraints and a
/// normalization, from cfg.n_starts seeded random feasible starts.
///
/// Columns are standardized internally and weights mapped back before
/// return. The best start wins (lowest index on ties). Infeasible systems
/// come back with status == infeasible and empty weights; throws Error(data)
/// when every feasible start has a degenerate composite.
FitResult maximize(const Dataset& ds, std::span<const LinearConstraint> constraints,
                   const Normalization& norm, const SolverConfig& cfg);

/// Finds constraint-satisfying weights whose correlation equals `target`.
///
/// Target must lie in (-1, 1). When it exceeds the constrained maximum the
/// maximizer is returned with status == infeasible.
FitResult solve_for_target(const Dataset& ds, std::span<const LinearConstraint> constraints,
                           const Normalization& norm, double target, const SolverConfig& cfg);

/// Rescales each side by a positive factor (or flips both sides) so the
/// weights satisfy `norm`; the correlation is unchanged.
FitResult rescale_result(const FitResult& res, const Normalization& norm);

}  // namespace maxcorr
