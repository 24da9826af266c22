#include <benchmark/benchmark.h>

#include "qrm/driver.hpp"

namespace {

using namespace qrm;

Discretization disc(double h) {
  Mesh mesh = generate_disc(1.0, h);
  auto part = partition_boundary(mesh, PartitionSpec::g34());
  return discretize(std::move(mesh), std::move(part), 1.0, [](Point) { return Complex(1.0, 1.0); });
}

// One mixed solve, factorization included.
void BM_SolveOnce(benchmark::State& state) {
  const Discretization d = disc(1.0 / static_cast<double>(state.range(0)));
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  QrParams p;
  p.variant = static_cast<Variant>(state.range(1));
  p.delta = 1e-5;
  for (auto _ : state) benchmark::DoNotOptimize(solve_once(d, md.data, p, md.exact));
  state.counters["edges"] = static_cast<double>(d.mesh.num_edges());
}
BENCHMARK(BM_SolveOnce)
    ->ArgsProduct({{10, 20, 40}, {0, 2}})
    ->ArgNames({"1/h", "variant"})
    ->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  const Discretization d = disc(0.1);
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  const auto grid = geometric_grid(1e-10, 1e-2, 9);
  const Solver solver = [&](const QrParams& p) { return solve_once(d, md.data, p, md.exact); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(sweep_delta(solver, QrParams{}, grid, true, static_cast<unsigned>(state.range(0))));
  }
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(2)->ArgName("jobs")->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_AutoEta(benchmark::State& state) {
  const Discretization d = disc(0.05);
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  for (auto _ : state) benchmark::DoNotOptimize(auto_eta(d.forms, md.data));
}
BENCHMARK(BM_AutoEta)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
