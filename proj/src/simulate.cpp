#include "folsim/simulate.hpp"

#include <filesystem>
#include <fstream>

#include "folsim/checkpoint.hpp"
#include "folsim/foliation_io.hpp"
#include "folsim/report.hpp"

namespace folsim {

namespace fs = std::filesystem;
using nlohmann::json;

json effective_config(const json& foliation, const RunConfig& c) {
    const EtaConfig& e = c.eta;
    return {{"foliation", foliation},
            {"n_paths", c.n_paths},
            {"t_max", c.t_max},
            {"dt", c.dt},
            {"burn_in", c.burn_in},
            {"seed", c.seed},
            {"eta_mode", to_string(c.eta_mode)},
            {"start_mode", to_string(c.start_mode)},
            {"kappa_interval", c.kappa_interval},
            {"kappa_channel", c.kappa_channel},
            {"switch_threshold", c.switch_threshold},
            {"step_tol", c.step_tol},
            {"abort_tolerance", c.abort_tolerance},
            {"eta",
             {{"rays", e.rays},
              {"rel_precision", e.rel_precision},
              {"ray_tol", e.ray_tol},
              {"forbidden_fraction", e.forbidden_fraction},
              {"max_radius", e.max_radius},
              {"brody_cap", std::isfinite(e.brody_cap) ? json(e.brody_cap) : json(nullptr)},
              {"initial_beta", e.scale},
              {"all_time_charts", e.all_time_charts},
              {"refresh_distance", e.refresh_distance},
              {"boundary_samples", e.boundary_samples}}}};
}

namespace {

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

struct Job {
    json foliation;
    FoliationSpec spec;
    RunConfig run;
    std::string out_dir;
    bool trajectory = false;
};

SimulateOutcome execute(Job& job, EnsembleState state, bool resumed, Execution execution,
                        int threads, double checkpoint_seconds, bool stop_after_checkpoint) {
    SimulateOutcome out;
    const fs::path dir(job.out_dir);
    fs::create_directories(dir);
    job.run.spec = &job.spec;
    RunContext ctx(job.run);
    if (!resumed) state = init_ensemble(ctx);

    std::ofstream traj;
    EnsembleOptions eo;
    eo.execution = execution;
    eo.threads = threads;
    eo.checkpoint_seconds = checkpoint_seconds;
    if (job.trajectory) {
        const fs::path tp = dir / "trajectory.csv";
        const bool fresh = !resumed || !fs::exists(tp);
        traj.open(tp, std::ios::binary | (fresh ? std::ios::trunc : std::ios::app));
        if (fresh) write_trajectory_header(traj);
        eo.trajectory = &traj;
    }
    const fs::path ckpt = dir / "checkpoint.json";
    const json extra = {{"out_dir", job.out_dir}, {"trajectory", job.trajectory}};
    bool stopped = false;
    eo.on_checkpoint = [&](const EnsembleState& s) {
        save_checkpoint(ckpt.string(), Checkpoint{job.foliation, job.run, s, extra});
        if (stop_after_checkpoint) {
            stopped = true;
            return false;
        }
        return true;
    };
    const json effective = effective_config(job.foliation, job.run);
    if (!advance_ensemble(ctx, state, eo) || stopped) {
        out.interrupted = true;
        out.message = "stopped after checkpoint " + ckpt.string();
        json partial = {{"format", "folsim-report"},
                        {"version", 1},
                        {"complete", false},
                        {"checkpoint", ckpt.string()},
                        {"step", state.step},
                        {"config", effective}};
        write_file(dir / "report.json", partial.dump(2) + "\n");
        return out;
    }
    const auto results = collect_results(ctx, state);
    out.report = make_report(job.run, results);
    write_file(dir / "report.json", report_to_json(out.report, effective).dump(2) + "\n");
    write_file(dir / "report.txt", report_to_text(out.report));
    write_file(dir / "summary.csv", csv_header() + csv_row(out.report));
    std::error_code ec;
    fs::remove(ckpt, ec);
    try {
        check_abort_rate(job.run, out.report);
    } catch (const NumericalFailure& e) {
        out.exit_code = kExitNumerical;
        out.message = e.what();
    }
    return out;
}

}  // namespace

SimulateOutcome simulate(const SimulateOptions& opt) {
    Job job{opt.foliation, foliation_from_json(opt.foliation), opt.run, opt.out_dir,
            opt.trajectory};
    return execute(job, {}, false, opt.execution, opt.threads, opt.checkpoint_seconds,
                   opt.stop_after_checkpoint);
}

SimulateOutcome resume(const ResumeOptions& opt) {
    Checkpoint c = load_checkpoint(opt.checkpoint);
    Job job{c.foliation, foliation_from_json(c.foliation), c.config,
            c.extra.value("out_dir", fs::path(opt.checkpoint).parent_path().string()),
            c.extra.value("trajectory", false)};
    return execute(job, std::move(c.state), true, opt.execution, opt.threads,
                   opt.checkpoint_seconds, opt.stop_after_checkpoint);
}

}  // namespace folsim
