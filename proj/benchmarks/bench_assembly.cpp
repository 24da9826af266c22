#include <benchmark/benchmark.h>

#include "qrm/driver.hpp"

namespace {

using namespace qrm;

const KappaField kKappa = [](Point) { return Complex(1.0, 1.0); };

double h_of(const benchmark::State& state) { return 1.0 / static_cast<double>(state.range(0)); }

void BM_GenerateDisc(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(generate_disc(1.0, h_of(state)));
}
BENCHMARK(BM_GenerateDisc)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state) {
  const Mesh mesh = generate_disc(1.0, h_of(state));
  const auto part = partition_boundary(mesh, PartitionSpec::g34());
  for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh, part, 1.0, kKappa));
  state.counters["edges"] = static_cast<double>(mesh.num_edges());
}
BENCHMARK(BM_Assemble)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_BuildSystem(benchmark::State& state) {
  Mesh mesh = generate_disc(1.0, h_of(state));
  auto part = partition_boundary(mesh, PartitionSpec::g34());
  const Discretization d = discretize(std::move(mesh), std::move(part), 1.0, kKappa);
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  const auto loads = loads_for(d.forms, md.data);
  QrParams p;
  p.variant = static_cast<Variant>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build_system(d.forms, loads, p));
}
BENCHMARK(BM_BuildSystem)
    ->ArgsProduct({{20, 40}, {0, 1, 2}})
    ->ArgNames({"1/h", "variant"})
    ->Unit(benchmark::kMillisecond);

}  // namespace
