#include <gtest/gtest.h>

#include <random>

#include "maxcorr/baselines.hpp"
#include "maxcorr/error.hpp"
#include "oracles.hpp"
#include "test_data.hpp"

namespace maxcorr {
namespace {

using testing::make_dataset;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const Dataset& noisy_bivariate() {
  static const Dataset ds = make_dataset({{0, 1, 2, 3}}, {{0, 1, 1, 2}});
  return ds;
}

TEST(LeastSquares, ExactLineNormalizingY) {
  const auto ds = make_dataset({{0, 1, 2}}, {{1, 3, 5}});
  const auto m = fit_least_squares(ds, 1);
  EXPECT_NEAR(m.weights.a(0), 2.0, 1e-12);
  EXPECT_NEAR(m.weights.b(0), 1.0, 0.0);
  EXPECT_NEAR(m.intercept, 1.0, 1e-12);
  EXPECT_NEAR(m.sse, 0.0, 1e-20);
}

// Residual e = b y - a x - c with a fixed to 1: 0.5 y - x - c = 0 gives c = 0.5.
TEST(LeastSquares, ExactLineNormalizingX) {
  const auto ds = make_dataset({{0, 1, 2}}, {{1, 3, 5}});
  const auto m = fit_least_squares(ds, 0);
  EXPECT_NEAR(m.weights.a(0), 1.0, 0.0);
  EXPECT_NEAR(m.weights.b(0), 0.5, 1e-12);
  EXPECT_NEAR(m.intercept, 0.5, 1e-12);
  EXPECT_NEAR(m.sse, 0.0, 1e-20);
}

TEST(LeastSquares, NoisyBivariateSlopesDependOnNormalization) {
  const auto on_y = fit_least_squares(noisy_bivariate(), 1);
  const auto on_x = fit_least_squares(noisy_bivariate(), 0);
  EXPECT_NEAR(on_y.weights.a(0) / on_y.weights.b(0), 0.6, 1e-12);
  EXPECT_NEAR(on_x.weights.a(0) / on_x.weights.b(0), 1.0 / 1.5, 1e-12);
  EXPECT_GT(model_divergence(on_y.weights, on_x.weights), 0.01);
  const double r = std::sqrt(0.9);
  const auto mc = maximize(noisy_bivariate(), {}, Normalization::fix(0), {});
  EXPECT_NEAR(mc.correlation, r, 1e-12);
  EXPECT_LE(on_y.achieved_correlation, mc.correlation + 1e-9);
  EXPECT_LE(on_x.achieved_correlation, mc.correlation + 1e-9);
}

TEST(Property, SseBookkeeping) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = testing::correlated_dataset(30, 3, 2, 50 + seed, 1.0);
    for (Eigen::Index k = 0; k < 5; ++k) {
      const auto m = fit_least_squares(ds, k);
      double sse = 0.0;
      for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        double e = -m.intercept;
        for (int j = 0; j < 2; ++j) e += m.weights.b(j) * ds.column("y" + std::to_string(j + 1)).values[r];
        for (int i = 0; i < 3; ++i) e -= m.weights.a(i) * ds.column("x" + std::to_string(i + 1)).values[r];
        sse += e * e;
      }
      EXPECT_NEAR(m.sse, sse, 1e-10 * sse);
    }
  }
}

// b_k = 1 is the regression of y_k on every x and every other y, with the
// y coefficients moved to the left-hand side.
TEST(Property, FixingAYCoefficientIsMultipleRegression) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = testing::correlated_dataset(40, 3, 3, 150 + seed, 1.0);
    for (int k = 0; k < 3; ++k) {
      oracle::Cols design;
      for (int i = 1; i <= 3; ++i) design.push_back(ds.column("x" + std::to_string(i)).values);
      for (int j = 0; j < 3; ++j) {
        if (j != k) design.push_back(ds.column("y" + std::to_string(j + 1)).values);
      }
      design.push_back(oracle::Vec(ds.n_rows(), 1.0));
      const auto beta = oracle::ols(design, ds.column("y" + std::to_string(k + 1)).values);
      const auto m = fit_least_squares(ds, 3 + k);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(m.weights.a(i), beta[i], 1e-10);
      std::size_t next = 3;
      for (int j = 0; j < 3; ++j) {
        if (j == k) {
          EXPECT_EQ(m.weights.b(j), 1.0);
        } else {
          EXPECT_NEAR(m.weights.b(j), -beta[next++], 1e-10);
        }
      }
      EXPECT_NEAR(m.intercept, beta.back(), 1e-10);
    }
  }
}

TEST(Property, LeastSquaresNeverBeatsMaxcorr) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = testing::correlated_dataset(30, 2, 3, 250 + seed, 2.0);
    const auto report = compare_normalizations(ds);
    for (const auto& fit : report.fits) {
      ASSERT_TRUE(fit.model) << fit.error;
      EXPECT_LE(std::abs(fit.model->achieved_correlation), report.maxcorr.correlation + 1e-9);
    }
  }
}

TEST(Compare, ExactRelationAgreesAcrossNormalizations) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<double> x1(20), x2(20), y1(20), y2(20);
  for (std::size_t r = 0; r < 20; ++r) {
    x1[r] = normal(rng);
    x2[r] = normal(rng);
    y2[r] = normal(rng);
    y1[r] = 2.0 * x1[r] - x2[r] + 0.5 * y2[r] + 3.0;
  }
  const auto report = compare_normalizations(make_dataset({x1, x2}, {y1, y2}));
  EXPECT_LE(report.divergence.maxCoeff(), 1e-9);
}

TEST(Compare, NoisyBivariateDiverges) {
  const auto report = compare_normalizations(noisy_bivariate());
  EXPECT_GT(report.divergence(0, 1), 0.01);
  EXPECT_EQ(report.divergence(0, 0), 0.0);
}

TEST(Divergence, IgnoresScaleAndSign) {
  const WeightPair w{vec({1, -2}), vec({0.5})};
  EXPECT_NEAR(model_divergence(w, {3 * w.a, 3 * w.b}), 0.0, 1e-15);
  EXPECT_NEAR(model_divergence(w, {-w.a, -w.b}), 0.0, 1e-15);
  EXPECT_GT(model_divergence(w, {w.a, -w.b}), 0.1);
}

TEST(Probe, FixedCoefficientLeastSquaresIsEquivariantButSumToOneIsNot) {
  const auto ds = testing::correlated_dataset(40, 2, 2, 77, 1.5);
  const auto probe = scale_invariance_probe(ds, "y1", 10.0);
  bool saw_sum_b = false;
  for (const auto& e : probe.least_squares) {
    if (e.normalization == "sum(b)=1") {
      saw_sum_b = true;
      EXPECT_TRUE(e.normalizes_scaled_column);
      EXPECT_GT(e.divergence, 0.01);
    } else if (e.normalization != "sum(a)=1") {
      EXPECT_LE(e.divergence, 1e-9) << e.normalization;
    }
  }
  EXPECT_TRUE(saw_sum_b);
  EXPECT_LE(probe.maxcorr.divergence, 1e-6);
  EXPECT_NEAR(probe.maxcorr.correlation_after, probe.maxcorr.correlation_before, 1e-9);
}

TEST(Probe, NoisyBivariateMaxcorrInvariant) {
  for (const char* col : {"x1", "y1"}) {
    const auto probe = scale_invariance_probe(noisy_bivariate(), col, 10.0);
    EXPECT_LE(probe.maxcorr.divergence, 1e-6);
    for (const auto& e : probe.least_squares) EXPECT_LE(e.divergence, 1e-9);
  }
}

TEST(Probe, BadArgumentsRejected) {
  EXPECT_THROW(scale_invariance_probe(noisy_bivariate(), "x1", -1.0), Error);
  EXPECT_THROW(scale_invariance_probe(noisy_bivariate(), "nope", 2.0), Error);
}

TEST(Orthogonal, ExactLine) {
  const auto fit = orthogonal_line_fit(vec({0, 1, 2, 3}), vec({1, 3, 5, 7}));
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-12);
  const auto swapped = orthogonal_line_fit(vec({1, 3, 5, 7}), vec({0, 1, 2, 3}));
  EXPECT_NEAR(swapped.slope, 0.5, 1e-12);
}

TEST(Orthogonal, NoisyBivariatePrincipalAxis) {
  // Population moments: sxx = 1.25, syy = 0.5, sxy = 0.75.
  const double sxx = 1.25, syy = 0.5, sxy = 0.75;
  const double lambda = 0.5 * (sxx + syy + std::sqrt((sxx - syy) * (sxx - syy) + 4 * sxy * sxy));
  const double slope = (lambda - sxx) / sxy;
  const auto fit = orthogonal_line_fit(vec({0, 1, 2, 3}), vec({0, 1, 1, 2}));
  EXPECT_NEAR(fit.slope, slope, 1e-12);
  EXPECT_NEAR(fit.slope, 0.6180339887498949, 1e-12);
  EXPECT_NEAR(fit.intercept, 1.0 - slope * 1.5, 1e-12);
  EXPECT_NEAR(fit.r_squared, 0.9, 1e-12);
}

// A quarter turn maps (x, y) to (-y, x); the fitted axis turns with it.
TEST(Property, OrthogonalFitFollowsQuarterTurns) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(15), y(15);
    const double s = normal(rng);
    for (int i = 0; i < 15; ++i) {
      x(i) = normal(rng);
      y(i) = s * x(i) + 0.3 * normal(rng);
    }
    const auto fit = orthogonal_line_fit(x, y);
    if (std::abs(fit.slope) < 1e-3) continue;
    const Eigen::VectorXd rx = -y;
    const auto turned = orthogonal_line_fit(rx, x);
    EXPECT_NEAR(turned.slope, -1.0 / fit.slope, 1e-9 * (1.0 + std::abs(turned.slope)));
  }
}

}  // namespace
}  // namespace maxcorr
