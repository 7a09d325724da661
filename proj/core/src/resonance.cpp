#include "maxcorr/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "maxcorr/error.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {
namespace {

// Strict weak ordering: higher correlation first, then lexicographic (a, b).
bool ranks_before(const ResonanceHit& lhs, const ResonanceHit& rhs) {
  if (lhs.correlation != rhs.correlation) return lhs.correlation > rhs.correlation;
  if (lhs.a != rhs.a) return lhs.a < rhs.a;
  return lhs.b < rhs.b;
}

std::int64_t first_nonzero(std::span<const std::int64_t> v) {
  for (auto c : v) {
    if (c != 0) return c;
  }
  return 0;
}

}  // namespace

double enumeration_size(std::size_t n_coefficients, int bound) {
  return std::pow(2.0 * bound + 1.0, static_cast<double>(n_coefficients));
}

IntegerSearchResult integer_search(const Dataset& ds, const IntegerSearchConfig& cfg) {
  if (cfg.bound < 1) throw_config("integer search bound must be at least 1");
  if (cfg.top_k < 1) throw_config("top_k must be at least 1");
  const StandardizedMoments moments(ds);
  const auto nx = static_cast<std::size_t>(moments.n_x());
  const auto n = static_cast<std::size_t>(moments.size());

  IntegerSearchResult result;
  result.enumeration_size = enumeration_size(n, cfg.bound);
  if (result.enumeration_size > cfg.ceiling) {
    throw_config("integer search would visit " + std::to_string(result.enumeration_size) +
                 " combinations, above the ceiling of " + std::to_string(cfg.ceiling) +
                 "; lower the bound or the number of variables");
  }

  std::vector<std::int64_t> coeff(n, -cfg.bound);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  const Eigen::VectorXd& sd = moments.sd();
  std::vector<ResonanceHit>& hits = result.hits;

  // Odometer over [-bound, bound]^n.
  while (true) {
    std::span<const std::int64_t> a(coeff.data(), nx);
    std::span<const std::int64_t> b(coeff.data() + nx, n - nx);
    // One representative per class {(+-a, +-b)}: first nonzero of each side positive.
    if (first_nonzero(a) > 0 && first_nonzero(b) > 0) {
      // Correlation ignores the scale of each side, so each side is reduced
      // by its own gcd.
      std::int64_t ga = 0, gb = 0;
      for (auto c : a) ga = std::gcd(ga, c);
      for (auto c : b) gb = std::gcd(gb, c);
      if (ga == 1 && gb == 1) {
        for (std::size_t i = 0; i < n; ++i) {
          w(static_cast<Eigen::Index>(i)) = static_cast<double>(coeff[i]) * sd(static_cast<Eigen::Index>(i));
        }
        const double r = moments.correlation(w);
        if (std::isnan(r)) {
          ++result.degenerate;
        } else {
          ++result.evaluated;
          ResonanceHit hit{{a.begin(), a.end()}, {b.begin(), b.end()}, std::abs(r)};
          if (r < 0.0) {
            for (auto& c : hit.b) c = -c;
          }
          if (hits.size() < cfg.top_k || ranks_before(hit, hits.back())) {
            hits.insert(std::upper_bound(hits.begin(), hits.end(), hit, ranks_before), std::move(hit));
            if (hits.size() > cfg.top_k) hits.pop_back();
          }
        }
      }
    }
    std::size_t pos = 0;
    while (pos < n && coeff[pos] == cfg.bound) coeff[pos++] = -cfg.bound;
    if (pos == n) break;
    ++coeff[pos];
  }
  return result;
}

NearestIntegerReport nearest_integer_report(const FitResult& res, double threshold) {
  if (!(threshold >= 0.0)) throw_config("nearest-integer threshold must be non-negative");
  const Eigen::VectorXd w = res.weights.concatenated();
  double smallest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) != 0.0) smallest = std::min(smallest, std::abs(w(i)));
  }
  if (!std::isfinite(smallest)) throw_data("cannot report nearest integers for all-zero weights");

  NearestIntegerReport report;
  report.scale = smallest;
  report.candidate = true;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double s = w(i) / smallest;
    const double nearest = std::round(s);
    report.scaled.push_back(s);
    report.nearest.push_back(static_cast<std::int64_t>(nearest));
    report.distance.push_back(std::abs(s - nearest));
    report.candidate = report.candidate && report.distance.back() <= threshold;
  }
  return report;
}

}  // namespace maxcorr
