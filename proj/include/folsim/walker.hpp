#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "folsim/eta.hpp"
#include "folsim/flow.hpp"
#include "folsim/philox.hpp"

namespace folsim {

// Leafwise Brownian motion. Leaf time is measured with the generator 2 Delta_P, the
// Laplace-Beltrami operator of the curvature -1 leaf metric; a step draws
//   delta zeta = sqrt(2 dt) (N1 + i N2) u / sigma,  sigma = |V|_FS / eta,
// where u aligns zeta-time with the transported tangent frame.

struct WalkerFlags {
    std::int64_t box_steps = 0;     // steps taken inside singular boxes
    std::int64_t box_entries = 0;
    std::int64_t halvings = 0;      // extra sub-segment splittings after failures
    std::int64_t eta_searches = 0;
    std::int64_t guard_trips = 0;
    bool in_box = false;
};

// Progress through the current singular box, in the linear normalization of the box.
struct BoxVisit {
    int box = -1;
    double entry_norm = 0.0;  // entry distance over box radius
    cd zeta{};                // complex time since entry, model units
    std::int64_t entry_step = 0;
    bool tripped = false;
};

struct LeafWalkerState {
    ChartPoint point;
    std::int64_t steps = 0;     // elapsed leaf time is steps * dt
    double log_holonomy = 0.0;
    Vec2 normal_unit{};
    Vec2 tangent_unit{};
    cd zeta_accum{};            // summed complex time (meaningful for global fields)
    RngStream rng;
    EtaCache eta_cache;
    double eta = 0.0;           // density used by the last step
    WalkerFlags flags;
    BoxVisit visit;
    bool aborted = false;
    std::string abort_reason;

    double leaf_time(double dt) const { return double(steps) * dt; }
};

LeafWalkerState make_walker(const LeafSpace& space, const ChartPoint& start, RngStream rng);

// Flags visits whose complex time exceeds exp(c R) |log |x|| (R leaf time since
// entry, |x| the entry depth); such paths are kept.
class DepthGuard {
public:
    explicit DepthGuard(const FoliationSpec& spec);
    void observe(LeafWalkerState& st, const EtaEstimate& e, cd dzeta, int time_chart,
                 double dt) const;

private:
    struct Entry {
        double radius = 0.0;
        double c = 1.0;
        std::array<cd, 3> lambda1{};  // leading eigenvalue of each time chart's field, 0 if unused
    };
    std::vector<Entry> entries_;
};

struct StepOptions {
    double dt = 1e-3;
    double tol = 1e-10;
    double max_displacement = 0.05;
    int max_halvings = 20;
    bool zero_noise = false;
    const DepthGuard* guard = nullptr;
};

struct HolonomyUpdate {
    double increment = 0.0;
    Vec2 normal{};
    bool ok = true;
};

// n' = P_perp(end) J n; increment log |n'|, new normal n'/|n'|.
HolonomyUpdate holonomy_increment(const LeafSpace& space, const FlowSegmentResult& segment,
                                  const Vec2& normal_unit);

// One step of size dt; returns false if the path had to be aborted.
bool bm_step(const LeafSpace& space, const EtaProvider& eta, LeafWalkerState& state,
             const StepOptions& opt);

// Leafwise Laplacian (same generator as the walker) of the log-holonomy
// specialization at p, by a five point stencil of ambient size h.
struct KappaProbe {
    double value = 0.0;
    double h = 0.0;
    int shrinks = 0;
    bool ok = true;
};
KappaProbe kappa_probe(const LeafSpace& space, const ChartPoint& p, double eta, double h,
                       double tol = 1e-10);

}  // namespace folsim
