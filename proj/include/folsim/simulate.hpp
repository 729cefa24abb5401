#pragma once

#include <string>

#include <json.hpp>

#include "folsim/ensemble.hpp"

namespace folsim {

// Process exit codes shared by the command line tools.
enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitNumerical = 3 };

struct SimulateOptions {
    nlohmann::json foliation;  // foliation description document
    RunConfig run;             // spec pointer is filled in by simulate()
    std::string out_dir;
    bool trajectory = false;
    Execution execution = Execution::Parallel;
    int threads = 0;
    double checkpoint_seconds = 60.0;
    bool stop_after_checkpoint = false;
};

struct SimulateOutcome {
    int exit_code = kExitPass;
    bool interrupted = false;
    EstimatorReport report;
    std::string message;
};

// Files written to out_dir: report.json, report.txt, summary.csv, checkpoint.json
// (while running) and trajectory.csv when requested.
SimulateOutcome simulate(const SimulateOptions& opt);

struct ResumeOptions {
    std::string checkpoint;
    Execution execution = Execution::Parallel;
    int threads = 0;
    double checkpoint_seconds = 60.0;
    bool stop_after_checkpoint = false;
};
SimulateOutcome resume(const ResumeOptions& opt);

// Human-readable echo of every effective setting.
nlohmann::json effective_config(const nlohmann::json& foliation, const RunConfig& cfg);

}  // namespace folsim
