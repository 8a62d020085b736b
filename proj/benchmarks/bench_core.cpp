#include <benchmark/benchmark.h>

#include <vector>

#include "alab/field.hpp"
#include "alab/geometry.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/spectral.hpp"

namespace {

alab::FieldSample field_for(const alab::LatticeCube& cube, std::uint64_t seed) {
  alab::FieldSpec spec;
  spec.region = alab::required_field_region(cube);
  spec.seed = seed;
  return alab::generate_field(spec);
}

alab::LatticeCube cube_of(int n, int d, double L) {
  return alab::build_cube(n, d, std::vector<int>(static_cast<std::size_t>(n * d), 0), L, 1.0);
}

void BM_GenerateField(benchmark::State& state) {
  alab::FieldSpec spec;
  const int side = static_cast<int>(state.range(0));
  spec.region = alab::LatticeBox({0, 0}, {side, side});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    spec.seed = ++seed;
    benchmark::DoNotOptimize(alab::generate_field(spec));
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_GenerateField)->Arg(32)->Arg(128);

void BM_Assemble(benchmark::State& state) {
  const alab::LatticeCube cube = cube_of(2, 1, static_cast<double>(state.range(0)));
  const alab::FieldSample field = field_for(cube, 1);
  alab::InteractionSpec interaction;
  interaction.u0 = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(alab::assemble(cube, field, interaction));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cube.size()));
}
BENCHMARK(BM_Assemble)->Arg(16)->Arg(32);

void BM_SpectralBottom(benchmark::State& state) {
  const alab::LatticeCube cube = cube_of(2, 1, static_cast<double>(state.range(0)));
  const alab::AssembledHamiltonian h = alab::assemble(cube, field_for(cube, 2), {});
  for (auto _ : state) benchmark::DoNotOptimize(alab::spectral_bottom(h, 4));
}
BENCHMARK(BM_SpectralBottom)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ResolventBlockNorm(benchmark::State& state) {
  const alab::LatticeCube cube = cube_of(1, 1, static_cast<double>(state.range(0)));
  const alab::AssembledHamiltonian h = alab::assemble(cube, field_for(cube, 3), {});
  const alab::SpectralData bottom = alab::spectral_bottom(h, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(alab::resolvent_block_norm(
        h, bottom.e0 - 0.5, alab::RegionMask::interior(), alab::RegionMask::outer(), {}, &bottom));
  }
}
BENCHMARK(BM_ResolventBlockNorm)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
