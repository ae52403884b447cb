// Microbenchmarks for the hot kernels at the reference resolution
// (Lambda = 2, n = 5, 81 points -> 324x324 blocks).

#include <benchmark/benchmark.h>

#include "bdf/dynamics.hpp"
#include "bdf/meanfield.hpp"

namespace {

using namespace bdf;

struct Fixture {
  std::shared_ptr<const MomentumLattice> lattice;
  std::vector<NucleusState> nuclei;
  KernelOperator q;
  SystemState state;

  Fixture()
      : lattice(build_lattice(2.0, 5)),
        nuclei{{1.0, 100.0, GaussianShape{0.5}, {-1, 0, 0}, {0, 0.05, 0}},
               {1.0, 100.0, GaussianShape{0.5}, {1, 0, 0}, {0, -0.05, 0}}},
        q(random_hs_sample(lattice, 1.0, 1)),
        state{q, nuclei, 0.0} {}
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_density(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(density_of(f.q));
}
BENCHMARK(BM_density);

void BM_exchange(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(exchange_op(f.q));
}
BENCHMARK(BM_exchange);

void BM_commutator(benchmark::State& state) {
  Fixture& f = fixture();
  const KernelOperator d = assemble_mean_field(f.q, f.nuclei, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(commutator(d, f.q));
}
BENCHMARK(BM_commutator);

void BM_bdf_rhs(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(bdf_rhs(f.q, f.nuclei, 0.1));
}
BENCHMARK(BM_bdf_rhs);

void BM_rk4_step(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(rk4_step(f.state, 1e-3, 0.1));
}
BENCHMARK(BM_rk4_step);

void BM_total_energy(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(total_energy(f.state, 0.1));
}
BENCHMARK(BM_total_energy);

}  // namespace

BENCHMARK_MAIN();
