#include <benchmark/benchmark.h>

#include "cartsel/selection.hpp"

using namespace cartsel;

namespace {

struct Fixture {
  Dataset ds = gen_breiman(1000, 1);
  SampleSplit split = split_three(ds, {}, 1, Method::M1);
  std::vector<VariableSubset> subsets = all_subsets(10);
  PenaltySpec spec;

  Fixture() {
    spec.n_eff = split.n2();
    spec.p = ds.p();
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_collection_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(build_collection_serial(f.ds, f.split, f.subsets, 5));
}

void BM_collection_parallel(benchmark::State& state) {
  const auto& f = fixture();
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(build_collection(f.ds, f.split, f.subsets, 5, jobs));
}

void BM_grid_serial(benchmark::State& state) {
  const auto& f = fixture();
  static const Collection c = build_collection_serial(f.ds, f.split, f.subsets, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        grid_select_serial(c, default_alpha_grid(), default_beta_grid(), f.spec));
}

void BM_grid_parallel(benchmark::State& state) {
  const auto& f = fixture();
  static const Collection c = build_collection_serial(f.ds, f.split, f.subsets, 5);
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        grid_select(c, default_alpha_grid(), default_beta_grid(), f.spec, jobs));
}

}  // namespace

BENCHMARK(BM_collection_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_collection_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_grid_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_grid_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
