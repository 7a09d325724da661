#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxcorr/dataset.hpp"
#include "maxcorr/model.hpp"
#include "maxcorr/solver.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {

/// Least-squares model of  e_i = (sum b y - sum a x - c)_i  under one
/// normalization. With a coefficient fixed to 1 this is ordinary multiple
/// regression with that variable as the dependent variable.
struct LsModel {
  WeightPair weights;
  double intercept = 0.0;
  Normalization normalization;
  double sse = 0.0;
  double achieved_correlation = 0.0;

  Eigen::VectorXd residuals(const Dataset& ds) const;
};

/// Fixes coefficient `normalized` (index into (a, b)) to 1 and solves the
/// implied OLS problem. Throws Error(data) on rank deficiency.
LsModel fit_least_squares(const Dataset& ds, Eigen::Index normalized);

/// Same, for any normalization. sum_to_one eliminates one coefficient of the
/// chosen side and regresses on differences.
LsModel fit_least_squares(const Dataset& ds, const Normalization& norm);

/// Distance between two models up to positive or negative scaling: each
/// concatenated (a, b) is scaled to unit length with its first nonzero entry
/// made positive, then the Euclidean distance is taken. 0 means equivalent.
double model_divergence(const WeightPair& lhs, const WeightPair& rhs);

struct NormalizationFit {
  Eigen::Index index = 0;
  std::string coefficient;  // "a.<name>" or "b.<name>"
  std::optional<LsModel> model;
  std::string error;  // set when the fit was skipped
};

struct ComparisonReport {
  std::vector<NormalizationFit> fits;
  Eigen::MatrixXd divergence;  // NaN where either fit was skipped
  FitResult maxcorr;
};

/// Fits one LsModel per choice of normalized coefficient and compares them
/// with each other and with the unconstrained maximum correlation.
ComparisonReport compare_normalizations(const Dataset& ds, const SolverConfig& cfg = {});

struct ProbeEntry {
  std::string method;         // "least_squares" or "maxcorr"
  std::string normalization;  // e.g. "b.y1=1" or "sum(a)=1"
  bool normalizes_scaled_column = false;
  WeightPair before;
  WeightPair after;  // refit on scaled data, mapped back to original units
  double divergence = 0.0;
  double correlation_before = 0.0;
  double correlation_after = 0.0;
};

struct ProbeReport {
  std::string column;
  double factor = 1.0;
  std::vector<ProbeEntry> least_squares;
  ProbeEntry maxcorr;
};

/// Multiplies `column` by `factor`, refits each method with the same
/// normalization, maps the scaled column's weight back to original units and
/// reports how far the model moved.
ProbeReport scale_invariance_probe(const Dataset& ds, const std::string& column, double factor,
                                   const SolverConfig& cfg = {});

/// Line through the centroid along the principal axis of the (X, Y) cloud,
/// minimizing squared perpendicular distances. r_squared is pearson^2.
LineModel orthogonal_line_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace maxcorr
