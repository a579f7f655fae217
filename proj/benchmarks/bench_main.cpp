#include <benchmark/benchmark.h>

#include <random>

#include "passmat/dissipop.hpp"
#include "passmat/passivity.hpp"
#include "passmat/sdp.hpp"
#include "passmat/smib.hpp"

namespace {

using namespace passmat;

StateSpace Plant() {
  Matrix a(2, 2), b(2, 2), c(2, 2), d(2, 2);
  a << -2, 3, -8, -10;
  b << -1.3, 3.4, 3.6, -1.7;
  c << 8, 9, 10, 7;
  d << 8, 8, 6, -8;
  return StateSpace(a, b, c, d);
}

// maximize t subject to S − tI ⪰ 0 for a random symmetric S.
void BM_SdpEpigraph(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Matrix s(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) s(i, j) = nd(rng);
  }
  SdpProblem p;
  p.num_vars = 1;
  p.objective = Vector::Ones(1);
  p.blocks.push_back({SymmetricMatrix(0.5 * (s + s.transpose())), {SymmetricMatrix::Identity(m) * -1.0}});
  for (auto _ : state) benchmark::DoNotOptimize(solve(p).objective_value);
}
BENCHMARK(BM_SdpEpigraph)->Arg(2)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ComputeOfpm(benchmark::State& state) {
  const StateSpace g = Plant();
  const Principle pr = state.range(0) == 0 ? Principle::TraceMax : Principle::MinEigMax;
  for (auto _ : state) benchmark::DoNotOptimize(compute_ofpm(g, pr).xi().trace());
}
BENCHMARK(BM_ComputeOfpm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DiscretizeOperator(benchmark::State& state) {
  const StateSpace g = Plant();
  const int n = static_cast<int>(state.range(0));
  const QuadraticSupplyRate q = QuadraticSupplyRate::Passivity(2);
  for (auto _ : state) benchmark::DoNotOptimize(discretize_operator(g, q, 40.0, n));
}
BENCHMARK(BM_DiscretizeOperator)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_RegionSweep(benchmark::State& state) {
  SweepWindow w;
  w.n11 = w.n22 = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(region_sweep(SmibParams{}, w).size());
}
BENCHMARK(BM_RegionSweep)->Arg(21)->Arg(81)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
