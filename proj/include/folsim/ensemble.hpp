#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "folsim/estimators.hpp"

namespace folsim {

enum class Execution { Serial, Parallel };

// All walkers of a run, advanced in lock-step rounds of `chunk` steps. Each round is a
// barrier at which the state may be checkpointed.
struct EnsembleState {
    std::vector<PathState> paths;
    std::int64_t step = 0;  // every unfinished path has reached this step
};

struct EnsembleOptions {
    Execution execution = Execution::Parallel;
    double chunk_time = 5.0;  // leaf time per round
    int threads = 0;          // 0: OpenMP default
    double checkpoint_seconds = 60.0;
    // Called at round barriers once checkpoint_seconds of wall time have passed;
    // returning false stops the run.
    std::function<bool(const EnsembleState&)> on_checkpoint;
    std::ostream* trajectory = nullptr;  // CSV rows at every round barrier
};

EnsembleState init_ensemble(const RunContext& ctx);

// Runs rounds until all paths finish (true) or on_checkpoint asks to stop (false).
bool advance_ensemble(const RunContext& ctx, EnsembleState& state, const EnsembleOptions& opt);

std::vector<PathResult> collect_results(const RunContext& ctx, const EnsembleState& state);

// Convenience: a whole run without checkpoints.
std::vector<PathResult> run_ensemble(const RunContext& ctx, Execution execution = Execution::Parallel,
                                     int threads = 0);

void write_trajectory_header(std::ostream& os);

bool have_openmp();

}  // namespace folsim
