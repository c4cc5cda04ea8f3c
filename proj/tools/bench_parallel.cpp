// Serial reference against the OpenMP path for the kernels that fan out:
// randomization LPs, per-BS subproblems and whole sweeps. Argument 0 is
// serial, 1 is parallel.

#include <benchmark/benchmark.h>

#include "mcbf/power_min.hpp"
#include "mcbf/primal_decomposition.hpp"
#include "mcbf/scenario.hpp"
#include "mcbf/sweep.hpp"

namespace {

using namespace mcbf;

Execution Mode(const benchmark::State& state) {
  return state.range(0) ? Execution::kParallel : Execution::kSerial;
}

struct Instance {
  Topology topology;
  ChannelSet channels;
};

Instance Make(int B, int G, int U, int A, std::uint64_t seed) {
  TopologyConfig c;
  c.B = B;
  c.G = G;
  c.U = U;
  c.A = A;
  c.gamma = DbToLinear(1.0);
  c.d = DbToLinear(1.0);
  Instance in;
  in.topology = BuildTopology(c);
  in.channels = SampleChannels(in.topology, seed);
  return in;
}

void BM_Randomization(benchmark::State& state) {
  const auto in = Make(1, 2, 12, 4, 3);
  const auto sol = conic::Solve(AssembleQosSdp(in.channels, in.topology));
  for (auto _ : state) {
    Rng rng(1);
    const auto sets = DrawCandidateSets(sol.matrix_values, 100, rng);
    benchmark::DoNotOptimize(RandomizePowerMin(in.channels, in.topology, sets, Mode(state)));
  }
}
BENCHMARK(BM_Randomization)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PrimalDecomposition(benchmark::State& state) {
  const auto in = Make(3, 3, 6, 6, 5);
  PrimalDecompositionOptions o;
  o.max_iters = 10;
  o.execution = Mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(RunPrimalDecomposition(in.channels, in.topology, o));
}
BENCHMARK(BM_PrimalDecomposition)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  const auto config = ParseScenarioText(R"(network: {B: 2, G: 2, U: 4, A: 4}
gamma_db: "0:2:4"
d_db: 1
schemes: [centralized, nulling, fixed-theta]
trials: 4
)");
  SweepOptions o;
  o.execution = Mode(state);
  o.timing = false;
  for (auto _ : state) benchmark::DoNotOptimize(RunSweep(config, o));
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
