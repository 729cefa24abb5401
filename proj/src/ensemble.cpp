#include "folsim/ensemble.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#ifdef FOLSIM_HAVE_OPENMP
#include <omp.h>
#endif

namespace folsim {

bool have_openmp() {
#ifdef FOLSIM_HAVE_OPENMP
    return true;
#else
    return false;
#endif
}

EnsembleState init_ensemble(const RunContext& ctx) {
    EnsembleState st;
    const auto n = std::size_t(ctx.config().n_paths);
    st.paths.reserve(n);
    for (std::size_t i = 0; i < n; ++i) st.paths.push_back(ctx.start_path(i));
    return st;
}

namespace {

void advance_serial(const RunContext& ctx, std::vector<PathState>& paths, std::int64_t target) {
    for (PathState& p : paths) ctx.advance(p, target);
}

void advance_parallel(const RunContext& ctx, std::vector<PathState>& paths, std::int64_t target,
                      int threads) {
#ifdef FOLSIM_HAVE_OPENMP
    const long n = long(paths.size());
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (long i = 0; i < n; ++i) ctx.advance(paths[std::size_t(i)], target);
#else
    (void)threads;
    advance_serial(ctx, paths, target);
#endif
}

void write_trajectory(std::ostream& os, const EnsembleState& st, double dt) {
    char buf[256];
    for (std::size_t i = 0; i < st.paths.size(); ++i) {
        const LeafWalkerState& w = st.paths[i].walker;
        const auto& q = w.point.q;
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", i,
                      w.leaf_time(dt), w.point.chart, q.x.real(), q.x.imag(), q.y.real(),
                      q.y.imag(), w.log_holonomy);
        os << buf;
    }
}

}  // namespace

void write_trajectory_header(std::ostream& os) {
    os << "path_id,t,chart,u_re,u_im,v_re,v_im,log_holonomy\n";
}

bool advance_ensemble(const RunContext& ctx, EnsembleState& state, const EnsembleOptions& opt) {
    const RunConfig& cfg = ctx.config();
    const std::int64_t total = cfg.total_steps();
    const std::int64_t chunk = std::max<std::int64_t>(1, std::llround(opt.chunk_time / cfg.dt));
    using clock = std::chrono::steady_clock;
    auto last = clock::now();
    while (state.step < total) {
        const std::int64_t target = std::min(total, state.step + chunk);
        if (opt.execution == Execution::Parallel)
            advance_parallel(ctx, state.paths, target, opt.threads);
        else
            advance_serial(ctx, state.paths, target);
        state.step = target;
        if (opt.trajectory) write_trajectory(*opt.trajectory, state, cfg.dt);
        if (opt.on_checkpoint && state.step < total &&
            std::chrono::duration<double>(clock::now() - last).count() >= opt.checkpoint_seconds) {
            last = clock::now();
            if (!opt.on_checkpoint(state)) return false;
        }
    }
    return true;
}

std::vector<PathResult> collect_results(const RunContext& ctx, const EnsembleState& state) {
    std::vector<PathResult> out;
    out.reserve(state.paths.size());
    for (std::size_t i = 0; i < state.paths.size(); ++i)
        out.push_back(ctx.finish(state.paths[i], i));
    return out;
}

std::vector<PathResult> run_ensemble(const RunContext& ctx, Execution execution, int threads) {
    EnsembleState st = init_ensemble(ctx);
    EnsembleOptions opt;
    opt.execution = execution;
    opt.threads = threads;
    opt.chunk_time = ctx.config().t_max;
    advance_ensemble(ctx, st, opt);
    return collect_results(ctx, st);
}

}  // namespace folsim
