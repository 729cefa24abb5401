// Serial reference loop against the OpenMP ensemble on the same run.

#include <benchmark/benchmark.h>

#include "folsim/ensemble.hpp"

namespace {

const folsim::FoliationSpec& spec() {
    static const folsim::FoliationSpec s = folsim::jouanolou(2);
    return s;
}

folsim::RunConfig bench_run(std::int64_t paths) {
    folsim::RunConfig cfg;
    cfg.spec = &spec();
    cfg.n_paths = paths;
    cfg.t_max = 2.0;
    cfg.burn_in = 0.5;
    cfg.dt = 1e-3;
    return cfg;
}

void BM_Ensemble(benchmark::State& state, folsim::Execution exec) {
    const folsim::RunContext ctx(bench_run(state.range(0)));
    for (auto _ : state) {
        auto results = folsim::run_ensemble(ctx, exec, int(state.range(1)));
        benchmark::DoNotOptimize(results.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * ctx.config().total_steps());
}

}  // namespace

BENCHMARK_CAPTURE(BM_Ensemble, serial, folsim::Execution::Serial)
    ->Args({32, 1})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK_CAPTURE(BM_Ensemble, openmp, folsim::Execution::Parallel)
    ->ArgsProduct({{32}, {1, 2, 4, 0}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
