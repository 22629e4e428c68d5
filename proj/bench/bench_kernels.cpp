// OpenMP kernels against their serial references, plus the per-sample cost of
// the rp and sp limit states on the synthetic network.

#include "seisnet/builtin.hpp"
#include "seisnet/limit_state.hpp"
#include "seisnet/reference.hpp"
#include "seisnet/sampler.hpp"
#include "seisnet/subset_sim.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <string>
#include <vector>

using namespace seisnet;

namespace {

struct Fixture {
  Scenario scenario = synthetic_network(2024);
  MarginDistribution dist = build_margin_distribution(scenario.network, scenario.model, 5.0);
  GaussianMap map{dist, 5.0};

  LimitStateFn limit_state(LimitStateKind kind) const {
    LimitStateSpec spec = scenario.spec;
    spec.kind = kind;
    return make_limit_state_factory(scenario.network, spec, dist)(5.0);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_LimitState(benchmark::State& state, LimitStateKind kind) {
  const Fixture& f = fixture();
  LimitStateFn g = f.limit_state(kind);
  std::mt19937_64 rng(1);
  std::vector<Eigen::VectorXd> zs(256);
  for (auto& z : zs) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(f.map.dim()));
    std::normal_distribution<double> normal;
    for (auto& x : u) x = normal(rng);
    z = f.map.map(u);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g(as_span(zs[i++ & 255])));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_LimitState, binary, LimitStateKind::binary);
BENCHMARK_CAPTURE(BM_LimitState, sp, LimitStateKind::sp);
BENCHMARK_CAPTURE(BM_LimitState, rp, LimitStateKind::rp);

template <bool Parallel>
void BM_CrudeMcs(benchmark::State& state) {
  const Fixture& f = fixture();
  const LimitStateFn g = f.limit_state(LimitStateKind::binary);
  McsTarget target;
  target.n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const McsResult r = Parallel ? crude_mcs(g, f.map, target, 3) : crude_mcs_serial(g, f.map, target, 3);
    benchmark::DoNotOptimize(r.p_hat);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_CrudeMcs, false)->Name("crude_mcs_serial")->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_CrudeMcs, true)->Name("crude_mcs_omp")->Arg(1 << 18)->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_RepeatSs(benchmark::State& state) {
  const Fixture& f = fixture();
  const LimitStateFn g = f.limit_state(LimitStateKind::rp);
  SsConfig config;
  config.seed = 17;
  const auto reps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const RepeatSummary s = Parallel ? repeat_ss(g, f.map, config, reps)
                                     : repeat_ss_serial(g, f.map, config, reps);
    benchmark::DoNotOptimize(s.mean_p);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_RepeatSs, false)->Name("repeat_ss_serial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_RepeatSs, true)->Name("repeat_ss_omp")->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
}
