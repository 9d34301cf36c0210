#include <benchmark/benchmark.h>

#include <numeric>

#include "ifbs/analysis.hpp"
#include "ifbs/engine.hpp"
#include "ifbs/linalg.hpp"
#include "ifbs/model.hpp"
#include "ifbs/prox.hpp"

namespace {

using namespace ifbs;

const L1LSInstance& full_scale() {
  static const L1LSInstance inst =
      generate_instance({.m = 300, .n = 2000, .sparsity = 50, .entry_std = 0.1, .rho = 1.0, .seed = 7});
  return inst;
}

void BM_ProxL1(benchmark::State& state) {
  const Vector z = Vector::LinSpaced(state.range(0), -3.0, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(prox_l1(z, 0.5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProxL1)->Arg(2000)->Arg(100000);

void BM_IfbsStep(benchmark::State& state) {
  const auto& inst = full_scale();
  const double lam = 1.0 / inst.lipschitz();
  SolverState s = SolverState::initial(Vector::Zero(inst.cols()));
  for (auto _ : state) {
    s = ifbs_step(inst.problem(), s, 0.5, lam);
    benchmark::DoNotOptimize(s.x_curr.data());
  }
}
BENCHMARK(BM_IfbsStep);

void BM_SipmStep(benchmark::State& state) {
  const auto& inst = full_scale();
  const double lam = 1.0 / inst.lipschitz();
  SolverState s = SolverState::initial(Vector::Zero(inst.cols()));
  for (auto _ : state) {
    s = sipm_step(inst.problem(), s, 0.3, lam);
    benchmark::DoNotOptimize(s.x_curr.data());
  }
}
BENCHMARK(BM_SipmStep);

void BM_LargestGramEigenvalue(benchmark::State& state) {
  const auto& inst = full_scale();
  for (auto _ : state) benchmark::DoNotOptimize(linalg::largest_gram_eigenvalue(inst.a()));
}
BENCHMARK(BM_LargestGramEigenvalue)->Unit(benchmark::kMillisecond);

void BM_SmallestRestrictedEigenvalue(benchmark::State& state) {
  const auto& inst = full_scale();
  IndexSet s(static_cast<std::size_t>(state.range(0)));
  std::iota(s.begin(), s.end(), Index{0});
  for (auto _ : state) benchmark::DoNotOptimize(linalg::smallest_restricted_eigenvalue(inst.a(), s));
}
BENCHMARK(BM_SmallestRestrictedEigenvalue)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ReferenceSolve(benchmark::State& state) {
  const auto& inst = full_scale();
  for (auto _ : state) benchmark::DoNotOptimize(reference_solve(inst, 1e-12).f_star);
}
BENCHMARK(BM_ReferenceSolve)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
BENCHMARK_MAIN();
