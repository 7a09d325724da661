#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "maxcorr/dataset.hpp"

namespace maxcorr::testing {

inline Column make_column(std::string name, Side side, std::vector<double> values) {
  Column c;
  c.name = std::move(name);
  c.side = side;
  c.values = std::move(values);
  return c;
}

/// Dataset with x-side columns x1..xp and y-side columns y1..yq.
inline Dataset make_dataset(const std::vector<std::vector<double>>& xs,
                            const std::vector<std::vector<double>>& ys) {
  std::vector<Column> cols;
  for (std::size_t i = 0; i < xs.size(); ++i) cols.push_back(make_column("x" + std::to_string(i + 1), Side::x, xs[i]));
  for (std::size_t j = 0; j < ys.size(); ++j) cols.push_back(make_column("y" + std::to_string(j + 1), Side::y, ys[j]));
  return Dataset(std::move(cols));
}

/// Standard-normal entries.
inline Dataset random_dataset(std::size_t rows, std::size_t nx, std::size_t ny, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> xs(nx, std::vector<double>(rows));
  std::vector<std::vector<double>> ys(ny, std::vector<double>(rows));
  for (auto& c : xs) for (auto& v : c) v = normal(rng);
  for (auto& c : ys) for (auto& v : c) v = normal(rng);
  return make_dataset(xs, ys);
}

/// Correlated two-block data: y columns depend on a shared latent driven by x.
inline Dataset correlated_dataset(std::size_t rows, std::size_t nx, std::size_t ny,
                                  std::uint64_t seed, double noise = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> xs(nx, std::vector<double>(rows));
  std::vector<std::vector<double>> ys(ny, std::vector<double>(rows));
  for (auto& c : xs) for (auto& v : c) v = normal(rng);
  std::vector<double> mix(nx);
  for (auto& m : mix) m = normal(rng);
  for (std::size_t r = 0; r < rows; ++r) {
    double latent = 0.0;
    for (std::size_t i = 0; i < nx; ++i) latent += mix[i] * xs[i][r];
    for (std::size_t j = 0; j < ny; ++j) ys[j][r] = (1.0 + 0.5 * j) * latent + noise * normal(rng);
  }
  return make_dataset(xs, ys);
}

/// 60 rows, three x columns mixed into a latent, y_j = loading_j * latent + noise.
inline Dataset planted_dataset(std::uint64_t seed, const std::vector<double>& loadings, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const std::size_t rows = 60, nx = 3;
  std::vector<std::vector<double>> xs(nx, std::vector<double>(rows));
  std::vector<std::vector<double>> ys(loadings.size(), std::vector<double>(rows));
  for (auto& c : xs) for (auto& v : c) v = normal(rng);
  std::vector<double> mix(nx);
  for (auto& m : mix) m = normal(rng);
  for (std::size_t r = 0; r < rows; ++r) {
    double latent = 0.0;
    for (std::size_t i = 0; i < nx; ++i) latent += mix[i] * xs[i][r];
    for (std::size_t j = 0; j < loadings.size(); ++j) ys[j][r] = loadings[j] * latent + noise * normal(rng);
  }
  return make_dataset(xs, ys);
}

}  // namespace maxcorr::testing
