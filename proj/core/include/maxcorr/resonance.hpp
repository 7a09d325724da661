#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "maxcorr/dataset.hpp"
#include "maxcorr/solver.hpp"

namespace maxcorr {

struct IntegerSearchConfig {
  int bound = 2;            // coefficients range over [-bound, bound]
  std::size_t top_k = 10;
  double ceiling = 1e8;     // refuse enumerations larger than this
  // Combinations with an all-zero side are never considered.
  static constexpr bool exclude_all_zero_side = true;
};

/// Integer combination in reduced form: the coefficients of each side have
/// gcd 1, the first nonzero a-coefficient is positive and the sign of b is
/// chosen so that the correlation is non-negative. Correlation ignores the
/// scale of each side, so (3, -2 | 2) and (3, -2 | 1) are the same hit.
struct ResonanceHit {
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;
  double correlation = 0.0;
};

struct IntegerSearchResult {
  std::vector<ResonanceHit> hits;  // best first
  double enumeration_size = 0.0;   // (2 bound + 1)^(p + q)
  std::size_t evaluated = 0;       // reduced forms scored
  std::size_t degenerate = 0;      // reduced forms skipped (zero variance)
};

/// Number of coefficient vectors the search would visit.
double enumeration_size(std::size_t n_coefficients, int bound);

/// Exhaustive search over integer weights in [-bound, bound]. Distinct
/// reduced forms are ranked by correlation (descending), ties broken by
/// lexicographic order of (a, b). Throws Error(config) when the enumeration
/// size exceeds the ceiling.
IntegerSearchResult integer_search(const Dataset& ds, const IntegerSearchConfig& cfg);

struct NearestIntegerReport {
  double scale = 0.0;              // smallest nonzero |weight|
  std::vector<double> scaled;      // (a, b) / scale
  std::vector<std::int64_t> nearest;
  std::vector<double> distance;
  bool candidate = false;          // every distance <= threshold
};

/// Rescales the fitted weights so the smallest-magnitude nonzero weight has
/// magnitude 1 and measures how far each lands from an integer.
NearestIntegerReport nearest_integer_report(const FitResult& res, double threshold);

}  // namespace maxcorr
