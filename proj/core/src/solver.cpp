#include "maxcorr/solver.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "maxcorr/error.hpp"
#include "maxcorr/feasible_region.hpp"

namespace maxcorr {
namespace {

constexpr int kMaxRedraws = 100;
constexpr double kAgreementTol = 1e-6;

struct Problem {
  StandardizedMoments moments;
  FeasibleRegion region;
  Side pinned;
  Eigen::VectorXd pin_row;  // normalization row, zero off the pinned side
  Eigen::VectorXd pin_mask;  // 1 on the pinned side, 0 elsewhere

  Problem(StandardizedMoments m, FeasibleRegion r, Side side, Eigen::VectorXd row)
      : moments(std::move(m)), region(std::move(r)), pinned(side), pin_row(std::move(row)),
        pin_mask(Eigen::VectorXd::Zero(moments.size())) {
    if (pinned == Side::x) {
      pin_mask.head(moments.n_x()).setOnes();
    } else {
      pin_mask.tail(moments.size() - moments.n_x()).setOnes();
    }
  }
};

Problem build_problem(const Dataset& ds, std::span<const LinearConstraint> constraints,
                      const Normalization& norm) {
  StandardizedMoments moments(ds);
  const Eigen::Index n = moments.size();
  const Eigen::Index nx = moments.n_x();
  FeasibleRegion region(n);
  const Eigen::VectorXd inv_sd = moments.sd().cwiseInverse();

  // c . w_raw = (c / sd) . w_std, so rows carry over with a column rescale.
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    if (c.coeffs.size() != n) {
      throw_config("constraint " + std::to_string(i) + " has " + std::to_string(c.coeffs.size()) +
                   " coefficients, expected " + std::to_string(n));
    }
    if (c.coeffs.isZero(0.0)) throw_config("constraint " + std::to_string(i) + " has all-zero coefficients");
    if (!std::isfinite(c.rhs) || !c.coeffs.allFinite()) {
      throw_config("constraint " + std::to_string(i) + " is not finite");
    }
    const Eigen::VectorXd row = c.coeffs.cwiseProduct(inv_sd);
    switch (c.relation) {
      case Relation::ge: region.add_inequality(row, c.rhs); break;
      case Relation::le: region.add_inequality(-row, -c.rhs); break;
      case Relation::eq: region.add_equality(row, c.rhs); break;
    }
  }

  Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
  if (norm.kind == Normalization::Kind::fix_coefficient) {
    if (norm.index < 0 || norm.index >= n) {
      throw_config("normalization index " + std::to_string(norm.index) + " is out of range");
    }
    if (!std::isfinite(norm.value) || norm.value == 0.0) {
      throw_config("normalization value must be finite and nonzero");
    }
    row(norm.index) = inv_sd(norm.index);
    region.add_equality(row, norm.value);
  } else {
    if (norm.side == Side::x) {
      row.head(nx) = inv_sd.head(nx);
    } else {
      row.tail(n - nx) = inv_sd.tail(n - nx);
    }
    region.add_equality(row, 1.0);
  }
  return Problem(std::move(moments), std::move(region), norm.pinned_side(nx), std::move(row));
}

AscentOptions ascent_options(const SolverConfig& cfg, Eigen::Index split) {
  AscentOptions opt;
  opt.convergence = cfg.convergence;
  opt.patience = cfg.patience;
  opt.max_iterations = cfg.max_iterations;
  opt.gradient_tolerance = cfg.gradient_tolerance;
  opt.split = split;
  return opt;
}

enum class DrawOutcome { ok, infeasible, degenerate };

struct Draw {
  DrawOutcome outcome = DrawOutcome::infeasible;
  Eigen::VectorXd w;
};

// Uniform [-1, 1] draw in standardized units, projected onto the region.
// Starts with negative correlation are sign-flipped on the free side when
// that stays feasible: no continuous path may connect b to -b.
Draw draw_start(const Problem& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Eigen::Index n = p.moments.size();
  const Eigen::Index nx = p.moments.n_x();
  Draw out;
  bool any_feasible = false;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Eigen::VectorXd w0(n);
    for (Eigen::Index i = 0; i < n; ++i) w0(i) = unif(rng);
    auto proj = p.region.project(w0);
    if (!proj) continue;
    any_feasible = true;
    Eigen::VectorXd w = *proj;
    double r = p.moments.correlation(w);
    if (std::isnan(r)) continue;
    if (r < 0.0) {
      Eigen::VectorXd flipped = w;
      if (p.pinned == Side::x) {
        flipped.tail(n - nx) *= -1.0;
      } else {
        flipped.head(nx) *= -1.0;
      }
      if (p.region.contains(flipped)) w = flipped;
    }
    out.outcome = DrawOutcome::ok;
    out.w = std::move(w);
    return out;
  }
  out.outcome = any_feasible ? DrawOutcome::degenerate : DrawOutcome::infeasible;
  return out;
}

std::mt19937_64 start_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t start) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(start)};
  return std::mt19937_64(seq);
}

// Cosine between the pinned side of w and its normalization row. Near zero
// the run sits far out in the normalization plane, close to the boundary of
// the half-space of directions that the normalization admits.
double pin_cosine(const Problem& p, const Eigen::VectorXd& w) {
  const Eigen::VectorXd side = p.pin_mask.cwiseProduct(w);
  const double denom = p.pin_row.norm() * side.norm();
  return denom > 0.0 ? std::abs(p.pin_row.dot(w)) / denom : 1.0;
}

// Far out in the plane rounding alone can break the feasibility tolerance.
std::optional<Eigen::VectorXd> feasible(const Problem& p, Eigen::VectorXd w) {
  if (p.region.contains(w)) return w;
  return p.region.project(w);
}

// Pulls the pinned side back along the ray towards the point of the plane
// closest to the origin. The plane is a badly scaled chart far out, so the
// ascent crawls there and this 1-D scan shortcuts it.
std::optional<Eigen::VectorXd> contract(const Problem& p, const Eigen::VectorXd& w, double value) {
  const Eigen::VectorXd pole =
      w - p.pin_mask.cwiseProduct(w) + p.pin_row * (p.pin_row.dot(w) / p.pin_row.squaredNorm());
  std::optional<Eigen::VectorXd> best;
  double best_value = value;
  double s = 1.0;
  for (int k = 0; k < 60; ++k) {
    s *= 0.5;
    auto cand = feasible(p, pole + s * (w - pole));
    if (!cand) continue;
    const double r = p.moments.correlation(*cand);
    if (r > best_value + 1e-12 * std::abs(best_value)) {
      best_value = r;
      best = std::move(*cand);
    }
  }
  return best;
}

// r does not depend on the scale of the free side, but steps along its
// gradient inflate it, and a cone apex at the origin can draw it in. Bring
// it back to the scale of the pinned side when the region allows.
Eigen::VectorXd rescale_free(const Problem& p, Eigen::VectorXd w) {
  const Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(w.size()) - p.pin_mask;
  const double pinned = p.pin_mask.cwiseProduct(w).norm();
  const double free = free_mask.cwiseProduct(w).norm();
  if (!(free > 0.0)) return w;
  const double target = std::max(1.0, pinned);
  if (free < 1e3 * target && free > 1e-3 * target) return w;
  auto cand = feasible(p, w + (target / free - 1.0) * free_mask.cwiseProduct(w));
  return cand ? *cand : w;
}

// A fixed-coefficient or sum normalization restricts the pinned side to an
// open half-space of directions, and runs can drift towards its boundary.
// Two moves bring them back: contraction along the ray, and mirroring every
// free coordinate when that keeps r (the run crossed to the equivalent
// representation of the opposite sign). A run left out there approaches a
// supremum that is not attained and does not count as converged.
AscentResult run_start(const Problem& p, const Objective& objective, Eigen::VectorXd w0,
                       AscentOptions opt) {
  constexpr int kMaxRestarts = 8;
  constexpr double kFarOut = 1e-3;
  int iterations = 0;
  opt.escape_norm = 1e6 * std::max(1.0, w0.norm());
  AscentResult run;
  for (int k = 0;; ++k) {
    run = active_set_ascent(p.region, objective, std::move(w0), opt);
    iterations += run.iterations;
    run.iterations = iterations;
    if (k == kMaxRestarts) break;
    if (pin_cosine(p, run.w) >= kFarOut) {
      if (run.converged && !run.escaped) break;
      Eigen::VectorXd shrunk = rescale_free(p, run.w);
      if (shrunk == run.w) break;
      w0 = std::move(shrunk);
      opt.escape_norm = 1e6 * std::max(1.0, w0.norm());
      continue;
    }
    if (auto pulled = contract(p, run.w, run.value)) {
      w0 = rescale_free(p, std::move(*pulled));
      opt.escape_norm = 1e6 * std::max(1.0, w0.norm());
      continue;
    }
    auto mirrored = p.region.project(-run.w);
    if (mirrored && p.moments.correlation(*mirrored) >= run.value - 1e-4) {
      if (auto pulled = contract(p, *mirrored, p.moments.correlation(*mirrored))) {
        w0 = rescale_free(p, std::move(*pulled));
      } else {
        w0 = rescale_free(p, std::move(*mirrored));
      }
      opt.escape_norm = 1e6 * std::max(1.0, w0.norm());
      continue;
    }
    break;
  }
  if (run.escaped || pin_cosine(p, run.w) < kFarOut) run.converged = false;
  run.w = rescale_free(p, std::move(run.w));
  return run;
}

// The normalization fixes the scale of one side only. Scale the other so
// both composites have the same standard deviation, which depends on the
// composites alone and so survives a change of units in any column.
Eigen::VectorXd balance_free_side(const Problem& p, const Eigen::VectorXd& w) {
  const Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(w.size()) - p.pin_mask;
  const Eigen::VectorXd pinned = p.pin_mask.cwiseProduct(w);
  const Eigen::VectorXd free = free_mask.cwiseProduct(w);
  const Eigen::MatrixXd& r = p.moments.corr();
  const double vp = pinned.dot(r * pinned);
  const double vf = free.dot(r * free);
  if (!(vp > 0.0) || !(vf > 0.0)) return w;
  const Eigen::VectorXd out = pinned + std::sqrt(vp / vf) * free;
  return p.region.contains(out, 1e-9) ? out : w;
}

FitResult make_result(const Dataset& ds, const Problem& p, const Eigen::VectorXd& w_std,
                      FitStatus status, int iterations) {
  FitResult res;
  res.weights = WeightPair::split(p.moments.from_standard(balance_free_side(p, w_std)), p.moments.n_x());
  res.correlation = correlation_of_weights(ds, res.weights);
  res.status = status;
  res.iterations = iterations;
  return res;
}

FitResult infeasible_result() {
  FitResult res;
  res.correlation = std::numeric_limits<double>::quiet_NaN();
  res.status = FitStatus::infeasible;
  return res;
}

}  // namespace

std::string_view to_string(Relation rel) {
  switch (rel) {
    case Relation::le: return "<=";
    case Relation::eq: return "=";
    case Relation::ge: return ">=";
  }
  return "?";
}

Relation relation_from_string(std::string_view text) {
  if (text == "<=") return Relation::le;
  if (text == ">=") return Relation::ge;
  if (text == "=" || text == "==") return Relation::eq;
  throw_config("unknown constraint relation '" + std::string(text) + "' (use <=, = or >=)");
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::optimal: return "optimal";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::infeasible: return "infeasible";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(convergence > 0.0 && convergence < 1.0)) throw_config("convergence must lie in (0, 1)");
  if (patience < 1) throw_config("patience must be at least 1");
  if (max_iterations < 1) throw_config("max_iterations must be at least 1");
  if (n_starts < 1) throw_config("n_starts must be at least 1");
  if (!(gradient_tolerance > 0.0)) throw_config("gradient_tolerance must be positive");
}

double max_violation(std::span<const LinearConstraint> constraints, const Normalization& norm,
                     const WeightPair& w) {
  const Eigen::VectorXd v = w.concatenated();
  double worst = 0.0;
  for (const auto& c : constraints) {
    const double lhs = c.coeffs.dot(v);
    switch (c.relation) {
      case Relation::ge: worst = std::max(worst, c.rhs - lhs); break;
      case Relation::le: worst = std::max(worst, lhs - c.rhs); break;
      case Relation::eq: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  if (norm.kind == Normalization::Kind::fix_coefficient) {
    worst = std::max(worst, std::abs(v(norm.index) - norm.value));
  } else {
    const double sum = norm.side == Side::x ? w.a.sum() : w.b.sum();
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

FitResult maximize(const Dataset& ds, std::span<const LinearConstraint> constraints,
                   const Normalization& norm, const SolverConfig& cfg) {
  cfg.validate();
  const Problem p = build_problem(ds, constraints, norm);
  const AscentOptions opt = ascent_options(cfg, p.moments.n_x());
  const Objective objective = [&p](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
    return p.moments.correlation(w, g);
  };

  std::vector<std::optional<AscentResult>> runs(static_cast<std::size_t>(cfg.n_starts));
  bool any_feasible = false;
  for (int s = 0; s < cfg.n_starts; ++s) {
    auto rng = start_rng(cfg.seed, 0, static_cast<std::uint64_t>(s));
    Draw draw = draw_start(p, rng);
    if (draw.outcome == DrawOutcome::infeasible) continue;
    any_feasible = true;
    if (draw.outcome == DrawOutcome::degenerate) continue;
    runs[static_cast<std::size_t>(s)] = run_start(p, objective, std::move(draw.w), opt);
  }
  if (!any_feasible) return infeasible_result();

  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    if (runs[s] && (!best || runs[s]->value > runs[*best]->value)) best = s;
  }
  if (!best) throw_data("every feasible start produced a degenerate (zero-variance) composite");

  const AscentResult& win = *runs[*best];
  FitResult res = make_result(ds, p, win.w,
                              win.converged ? FitStatus::optimal : FitStatus::max_iterations,
                              win.iterations);
  for (const auto& run : runs) {
    if (!run) continue;
    if (std::abs(run->value - win.value) <= kAgreementTol) ++res.starts_agreeing;
    if (run->converged) ++res.starts_converged;
  }
  return res;
}

FitResult solve_for_target(const Dataset& ds, std::span<const LinearConstraint> constraints,
                           const Normalization& norm, double target, const SolverConfig& cfg) {
  if (!(target > -1.0 && target < 1.0)) throw_config("target correlation must lie in (-1, 1)");
  FitResult best = maximize(ds, constraints, norm, cfg);
  if (best.status == FitStatus::infeasible) return best;
  if (target > best.correlation + 1e-9) {
    best.status = FitStatus::infeasible;
    return best;
  }

  const Problem p = build_problem(ds, constraints, norm);
  const Eigen::VectorXd w_max = p.moments.to_standard(best.weights.concatenated());
  const double r_max = p.moments.correlation(w_max);
  if (std::abs(r_max - target) <= 1e-10) return best;

  const AscentOptions opt = ascent_options(cfg, p.moments.n_x());
  const Objective objective = [&p, target](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
    const double r = p.moments.correlation(w, g);
    g *= -2.0 * (r - target);
    return -(r - target) * (r - target);
  };
  const auto reached = [](double f) { return f >= -1e-20; };

  int total_iterations = best.iterations;
  std::optional<AscentResult> fallback;
  for (int s = 0; s < cfg.n_starts; ++s) {
    auto rng = start_rng(cfg.seed, 1, static_cast<std::uint64_t>(s));
    // Average several projected draws: a convex combination of boundary
    // points tends to sit strictly inside the region.
    Eigen::VectorXd centre = Eigen::VectorXd::Zero(p.moments.size());
    int used = 0;
    for (int k = 0; k < 8; ++k) {
      Draw draw = draw_start(p, rng);
      if (draw.outcome != DrawOutcome::ok) continue;
      centre += draw.w;
      ++used;
    }
    if (used == 0) continue;
    centre /= used;
    const double r0 = p.moments.correlation(centre);
    if (std::isnan(r0)) continue;

    Eigen::VectorXd w = centre;
    if (r0 < target) {
      // r(centre) < target <= r(w_max): bracket along the feasible segment.
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Eigen::VectorXd wm = (1.0 - mid) * centre + mid * w_max;
        const double r = p.moments.correlation(wm);
        ++total_iterations;
        if (!(r >= target)) {
          lo = mid;
        } else {
          hi = mid;
        }
        if (hi - lo < 1e-15) break;
      }
      w = (1.0 - hi) * centre + hi * w_max;
    }
    AscentResult run = active_set_ascent(p.region, objective, w, opt, reached);
    total_iterations += run.iterations;
    const double r = p.moments.correlation(run.w);
    if (std::isfinite(r) && std::abs(r - target) <= 1e-8) {
      FitResult res = make_result(ds, p, run.w, FitStatus::optimal, total_iterations);
      res.starts_agreeing = 1;
      res.starts_converged = 1;
      return res;
    }
    if (!fallback || run.value > fallback->value) fallback = std::move(run);
  }
  if (!fallback) throw_data("no usable feasible start for the target search");
  const double r = p.moments.correlation(fallback->w);
  FitResult res = make_result(ds, p, fallback->w,
                              std::abs(r - target) <= 1e-6 ? FitStatus::optimal
                                                           : FitStatus::max_iterations,
                              total_iterations);
  return res;
}

FitResult rescale_result(const FitResult& res, const Normalization& norm) {
  FitResult out = res;
  const Eigen::Index nx = res.weights.a.size();
  double factor = 0.0;
  Side side = Side::x;
  if (norm.kind == Normalization::Kind::fix_coefficient) {
    if (norm.index < 0 || norm.index >= res.weights.size()) {
      throw_config("normalization index out of range");
    }
    side = norm.index < nx ? Side::x : Side::y;
    const double current = side == Side::x ? res.weights.a(norm.index)
                                           : res.weights.b(norm.index - nx);
    if (current == 0.0) throw_data("cannot rescale: the normalized coefficient is zero");
    factor = norm.value / current;
  } else {
    side = norm.side;
    const double sum = side == Side::x ? res.weights.a.sum() : res.weights.b.sum();
    if (sum == 0.0) throw_data("cannot rescale: the weights on that side sum to zero");
    factor = 1.0 / sum;
  }
  (side == Side::x ? out.weights.a : out.weights.b) *= factor;
  // A negative factor flips one composite; flip the other to keep the sign of r.
  if (factor < 0.0) (side == Side::x ? out.weights.b : out.weights.a) *= -1.0;
  return out;
}

}  // namespace maxcorr
