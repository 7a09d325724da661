#include <benchmark/benchmark.h>

#include <vector>

#include "maxcorr/cca.hpp"
#include "maxcorr/resonance.hpp"
#include "maxcorr/solver.hpp"
#include "test_data.hpp"

namespace {

using namespace maxcorr;

// b1 >= b2 >= ... >= bq on a problem with nx x-columns.
std::vector<LinearConstraint> ordered_b(Eigen::Index nx, Eigen::Index ny) {
  std::vector<LinearConstraint> out;
  for (Eigen::Index k = 0; k + 1 < ny; ++k) {
    LinearConstraint c{Eigen::VectorXd::Zero(nx + ny), Relation::ge, 0.0};
    c.coeffs(nx + k) = 1.0;
    c.coeffs(nx + k + 1) = -1.0;
    out.push_back(c);
  }
  return out;
}

void BM_MaximizeFree(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto ds = testing::correlated_dataset(200, p, p, 7, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(maximize(ds, {}, Normalization::fix(0), {}));
}
BENCHMARK(BM_MaximizeFree)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_MaximizeOrdered(benchmark::State& state) {
  const auto p = static_cast<Eigen::Index>(state.range(0));
  const auto ds = testing::correlated_dataset(200, static_cast<std::size_t>(p), static_cast<std::size_t>(p), 7, 1.5);
  const auto cons = ordered_b(p, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(maximize(ds, cons, Normalization::sum_to_one(Side::y), {}));
  }
}
BENCHMARK(BM_MaximizeOrdered)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_CcaFirstPair(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto ds = testing::correlated_dataset(200, p, p, 7, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(cca_first_pair(ds));
}
BENCHMARK(BM_CcaFirstPair)->Arg(2)->Arg(8)->Arg(32);

void BM_IntegerSearch(benchmark::State& state) {
  const auto ds = testing::correlated_dataset(100, 3, 2, 7, 1.0);
  IntegerSearchConfig cfg;
  cfg.bound = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integer_search(ds, cfg));
}
BENCHMARK(BM_IntegerSearch)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
