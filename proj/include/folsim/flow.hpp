#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "folsim/complex2.hpp"
#include "folsim/foliation.hpp"

namespace folsim {

enum class AmbientMetric { FubiniStudy, Euclidean };

// Where leaves live: a foliation of P^2 with its Fubini-Study metric, or the
// unit bidisc of chart 2 with the Euclidean metric (the linear model).
struct LeafSpace {
    const FoliationSpec* spec = nullptr;
    AmbientMetric metric = AmbientMetric::FubiniStudy;
    double switch_threshold = kChartSwitchThreshold;
    bool bidisc_domain = false;

    static LeafSpace projective(const FoliationSpec& spec, double threshold = kChartSwitchThreshold);
    // Chart-2 bidisc of a degree-one fixture; no chart switching.
    static LeafSpace model(const FoliationSpec& linear);

    const PolyVectorField& field() const { return spec->field; }

    // Hermitian inner product g(a, b) at p and the Riemannian length sqrt(2 g(a, a)).
    cd inner(const ChartPoint& p, const Vec2& a, const Vec2& b) const {
        if (metric == AmbientMetric::Euclidean)
            return a.x * std::conj(b.x) + a.y * std::conj(b.y);
        return fs_inner(p.q, a, b);
    }
    double length(const ChartPoint& p, const Vec2& a) const {
        return std::sqrt(2.0 * std::max(0.0, inner(p, a, a).real()));
    }

    // Time chart used for dynamics from p: the chart with the largest homogeneous
    // coordinate (chart 2 in the model).
    int time_chart(const ChartPoint& p) const {
        return bidisc_domain ? 2 : best_chart(lift(p));
    }
};

enum class FlowStatus { Ok, StepUnderflow, Forbidden, LeftDomain, NonFinite };

const char* to_string(FlowStatus s);

struct FlowOptions {
    double tol = 1e-10;
    int time_chart = -1;                  // -1: the chart of the start point
    double forbidden_box_fraction = 0.0;  // > 0: fail inside that fraction of any box
    int max_steps = 20000;
    bool want_jacobian = true;
};

struct FlowSegmentResult {
    ChartPoint endpoint;
    Mat2 jacobian = Mat2::identity();  // start chart coordinates -> endpoint chart coordinates
    cd zeta_used{};
    int chart_switches = 0;
    int steps = 0;
    FlowStatus status = FlowStatus::Ok;

    bool ok() const { return status == FlowStatus::Ok; }
};

// Integrates dq/ds = zeta V(q), dJ/ds = zeta DV(q) J on s in [0, 1] with an adaptive
// Dormand-Prince 5(4) pair, V being the field of the time chart.
FlowSegmentResult flow_segment(const LeafSpace& space, const ChartPoint& p, cd zeta,
                               const FlowOptions& opt = {});

// Unit (Riemannian) normal to the leaf at p, given any tangent vector there.
Vec2 unit_normal(const LeafSpace& space, const ChartPoint& p, const Vec2& tangent);

}  // namespace folsim
