#pragma once

#include <limits>
#include <vector>

#include "folsim/flow.hpp"
#include "folsim/local_model.hpp"

namespace folsim {

enum class EtaMethod { FlowDisc, SingularBox, Model };

const char* to_string(EtaMethod m);

struct EtaEstimate {
    double value = 0.0;
    EtaMethod method = EtaMethod::FlowDisc;
    double trust = 1.0;   // lower / upper end of the radius bracket
    double radius = 0.0;  // flow-disc radius in ambient length units
    int box = -1;         // singular box index for the box formula
    double distance = 0.0;  // distance to that singularity
};

// Per-walker memo of the last flow-disc search.
struct EtaCache {
    bool valid = false;
    double value = 0.0;
    double radius = 0.0;
    double trust = 1.0;
    Vec3 anchor{};
    int method = 0;
};

class EtaProvider {
public:
    virtual ~EtaProvider() = default;
    // Density at p; `frame` is an optional unit tangent fixing the ray orientation.
    virtual EtaEstimate estimate(const ChartPoint& p, const Vec2* frame = nullptr,
                                 double radius_hint = 0.0) const = 0;
    // Walker entry point: may reuse `cache` instead of searching again.
    virtual EtaEstimate update(const ChartPoint& p, const Vec2* frame, EtaCache& cache) const {
        const EtaEstimate e = estimate(p, frame, 0.0);
        cache.valid = false;
        return e;
    }
    // Global multiplier applied to every value (the initial scale choice).
    virtual double scale() const { return 1.0; }
};

struct EtaConfig {
    int rays = 12;
    double rel_precision = 0.05;
    double ray_tol = 1e-8;
    double forbidden_fraction = 0.5;  // rays may not enter this fraction of any box
    double max_radius = 16.0;
    double min_radius = 1e-9;
    double brody_cap = std::numeric_limits<double>::infinity();
    double scale = 1.0;
    bool all_time_charts = false;  // best disc over the three time parametrizations
    double refresh_distance = 0.5;  // Poincare distance before a cached search expires
    int boundary_samples = 64;
};

// Flow-disc lower bound outside singular boxes, c_a s log*(s) inside.
class EtaEstimator final : public EtaProvider {
public:
    EtaEstimator(const LeafSpace& space, EtaConfig cfg = {});

    EtaEstimate estimate(const ChartPoint& p, const Vec2* frame = nullptr,
                         double radius_hint = 0.0) const override;
    EtaEstimate update(const ChartPoint& p, const Vec2* frame, EtaCache& cache) const override;
    double scale() const override { return cfg_.scale; }

    struct DiscSearch {
        double radius = 0.0;  // largest radius whose rays all succeeded
        double upper = 0.0;   // smallest radius seen to fail
        int tests = 0;
    };
    // Radius search on the flow discs zeta -> flow(p, zeta) in ambient length units.
    DiscSearch flow_disc_radius(const ChartPoint& p, const Vec2* frame, double hint) const;
    bool disc_succeeds(const ChartPoint& p, const Vec2* frame, double radius) const;

    double box_constant(int singularity) const { return box_c_.at(std::size_t(singularity)); }
    const EtaConfig& config() const { return cfg_; }
    const LeafSpace& space() const { return space_; }

private:
    EtaEstimate finish(EtaEstimate e) const;
    bool disc_succeeds_in_chart(const ChartPoint& p, const Vec2* frame, double radius,
                                int time_chart) const;

    LeafSpace space_;
    EtaConfig cfg_;
    std::vector<double> box_c_;
};

// Leaf densities of the linear model (chart-2 bidisc of a linear fixture).
class ModelEta final : public EtaProvider {
public:
    enum class Kind { Exact, Asymptotic };
    ModelEta(const LocalModel& model, Kind kind, double scale = 1.0)
        : model_(model), kind_(kind), scale_(scale) {}

    EtaEstimate estimate(const ChartPoint& p, const Vec2* frame = nullptr,
                         double radius_hint = 0.0) const override;
    double scale() const override { return scale_; }

private:
    LocalModel model_;
    Kind kind_;
    double scale_;
};

// Points at Fubini-Study distance `radius` from singularity i, along `count`
// deterministic directions of its eigen-coordinates.
std::vector<ChartPoint> box_boundary_points(const FoliationSpec& spec, int singularity,
                                            double radius, int count);

}  // namespace folsim
