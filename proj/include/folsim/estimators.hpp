#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "folsim/eta.hpp"
#include "folsim/statistics.hpp"
#include "folsim/walker.hpp"

namespace folsim {

enum class EtaMode { Raw, Calibrated };
enum class StartMode { Fixed, Random };

const char* to_string(EtaMode m);
const char* to_string(StartMode m);
EtaMode parse_eta_mode(const std::string& s);

struct RunConfig {
    const FoliationSpec* spec = nullptr;
    std::int64_t n_paths = 256;
    double t_max = 200.0;
    double dt = 1e-3;
    double burn_in = 20.0;
    std::uint64_t seed = 1;
    EtaMode eta_mode = EtaMode::Calibrated;
    // Random: two FS-uniform start points drawn from the seed, even paths use the first.
    StartMode start_mode = StartMode::Random;
    ChartPoint fixed_start{};
    double kappa_interval = 0.25;
    bool kappa_channel = true;
    double switch_threshold = kChartSwitchThreshold;
    EtaConfig eta{};  // eta.scale is the initial beta
    double step_tol = 1e-10;
    // Walk the chart-2 unit bidisc of a linear fixture with its exact leaf density.
    bool model_world = false;
    cd model_lambda{0.0, 1.0};
    double abort_tolerance = 0.01;  // fraction of aborted paths tolerated

    std::int64_t total_steps() const;
    std::int64_t burn_steps() const;
    std::int64_t kappa_every() const;
    void validate() const;  // throws std::invalid_argument
};

struct Rational {
    long num = 0, den = 1;
    double value() const { return double(num) / double(den); }
    std::string str() const;
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct ChiPrediction {
    Rational chi;
    int nor_degree = 0;    // Nor = O(d + 2)
    int cotan_degree = 0;  // Cotan = O(d - 1)
};

// -(d+2)/(d-1) in lowest terms; throws std::invalid_argument for d < 2.
ChiPrediction predict_chi(int d);

struct PathResult {
    std::uint64_t path_id = 0;
    int start_group = 0;
    double chi = 0.0;            // per unit leaf time after burn-in
    double kappa_sum = 0.0;
    std::int64_t kappa_samples = 0;
    std::int64_t kappa_failures = 0;
    double eta2_mean = 0.0;      // time average of eta^2 after burn-in
    double w_half = 0.0, w_full = 0.0;
    double logdist_half = 0.0, logdist_full = 0.0;
    double box_fraction = 0.0;
    double f1_constant = 0.0;    // max over unit windows of |d log H| / mean log* dist
    std::array<std::int64_t, 4> trust_hist{};
    std::int64_t box_entries = 0;
    std::int64_t guard_trips = 0;
    std::int64_t halvings = 0;
    bool aborted = false;
    std::string abort_reason;

    double kappa_mean() const {
        return kappa_samples > 0 ? kappa_sum / double(kappa_samples) : 0.0;
    }
};

// Per-path integration state; advanced in chunks so that runs can be checkpointed.
struct PathState {
    LeafWalkerState walker;
    int start_group = 0;
    double logh_burn = 0.0;
    double eta2_sum = 0.0;
    double w_half = 0.0, w_full = 0.0, ld_half = 0.0, ld_full = 0.0;
    double box_steps = 0.0;
    double kappa_sum = 0.0;
    std::int64_t kappa_samples = 0, kappa_failures = 0;
    double window_logh = 0.0, window_ld = 0.0;
    std::int64_t window_n = 0;
    double f1_max = 0.0;
    std::array<std::int64_t, 4> trust_hist{};
    bool done = false;
};

// Shared read-only context of a run: leaf space, eta provider, guard, start points.
class RunContext {
public:
    explicit RunContext(const RunConfig& cfg);
    // For tests: a caller-supplied eta provider and optional fixed kappa value.
    RunContext(const RunConfig& cfg, std::shared_ptr<const EtaProvider> eta);

    const RunConfig& config() const { return cfg_; }
    const LeafSpace& space() const { return space_; }
    const EtaProvider& eta() const { return *eta_; }
    const DepthGuard& guard() const { return *guard_; }
    const std::array<ChartPoint, 2>& starts() const { return starts_; }

    PathState start_path(std::uint64_t path_id) const;
    // Advances until `until_step` (clamped to the run length).
    void advance(PathState& st, std::int64_t until_step) const;
    PathResult finish(const PathState& st, std::uint64_t path_id) const;
    PathResult run_path(std::uint64_t path_id) const;

    // Injected probe value replacing kappa_probe (synthetic fixtures).
    std::optional<double> kappa_override;

private:
    void sample(PathState& st) const;

    RunConfig cfg_;
    LeafSpace space_;
    std::shared_ptr<const EtaProvider> eta_;
    std::unique_ptr<DepthGuard> guard_;
    std::array<ChartPoint, 2> starts_{};
};

// FS-uniform start points derived from the seed.
std::array<ChartPoint, 2> random_start_points(std::uint64_t seed);

struct EstimatorReport {
    std::string family;
    int degree = 0;
    std::int64_t n_paths = 0;
    double t_max = 0.0, dt = 0.0, burn_in = 0.0;
    std::uint64_t seed = 0;
    EtaMode eta_mode = EtaMode::Calibrated;
    double initial_beta = 1.0;

    // Raw channels, normalized to beta = 1.
    Interval chi_cocycle_raw, chi_kappa_raw, mass_raw;
    double beta_fit = 1.0;
    // Reported channels: raw or calibrated according to eta_mode.
    Interval chi_cocycle, chi_kappa, mass;
    double residual_mass = 0.0;
    double residual_cross = 0.0;
    ChiPrediction predicted;

    std::array<Interval, 2> chi_by_start{};
    double ergodicity_z = 0.0;  // |difference| / combined half-width

    double w_half = 0.0, w_full = 0.0, logdist_half = 0.0, logdist_full = 0.0;
    double box_fraction = 0.0;
    double f1_constant = 0.0;
    std::int64_t guard_trips = 0, box_entries = 0, halvings = 0;
    std::int64_t aborted = 0, kappa_failures = 0;
    std::array<std::int64_t, 4> trust_hist{};
    bool complete = true;
};

// Combines per-path results; aborted paths are excluded from the statistics.
EstimatorReport make_report(const RunConfig& cfg, std::span<const PathResult> paths);

// Throws NumericalFailure when the aborted-path rate exceeds the tolerance.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
void check_abort_rate(const RunConfig& cfg, const EstimatorReport& r);

double mass_identity_residual(int d, double m_hat);

struct CrossConsistency {
    double residual = 0.0;
    bool pass = false;
};
// Largest pairwise gap among chi_cocycle, chi_kappa and -(d+2) m in combined half-widths.
CrossConsistency cross_consistency(const EstimatorReport& r);

}  // namespace folsim
