#include "folsim/flow.hpp"

#include <algorithm>
#include <cmath>

namespace folsim {

LeafSpace LeafSpace::projective(const FoliationSpec& spec, double threshold) {
    LeafSpace s;
    s.spec = &spec;
    s.switch_threshold = threshold;
    return s;
}

LeafSpace LeafSpace::model(const FoliationSpec& linear) {
    LeafSpace s;
    s.spec = &linear;
    s.metric = AmbientMetric::Euclidean;
    s.switch_threshold = std::numeric_limits<double>::infinity();
    s.bidisc_domain = true;
    return s;
}

const char* to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::Ok: return "ok";
        case FlowStatus::StepUnderflow: return "step-underflow";
        case FlowStatus::Forbidden: return "forbidden-zone";
        case FlowStatus::LeftDomain: return "left-domain";
        case FlowStatus::NonFinite: return "non-finite";
    }
    return "unknown";
}

Vec2 unit_normal(const LeafSpace& space, const ChartPoint& p, const Vec2& tangent) {
    // g(n, t) = n . (G conj t) = 0
    Vec2 w;
    if (space.metric == AmbientMetric::Euclidean) {
        w = {std::conj(tangent.x), std::conj(tangent.y)};
    } else {
        const Mat2 g = fs_metric(p.q);
        w = g * Vec2{std::conj(tangent.x), std::conj(tangent.y)};
    }
    Vec2 n{-w.y, w.x};
    const double len = space.length(p, n);
    return (1.0 / len) * n;
}

namespace {

struct Augmented {
    Vec2 q;
    Mat2 j;
};

inline void axpy(Augmented& out, const Augmented& base, cd h, const Augmented* k,
                 const double* coef, int n) {
    out = base;
    for (int i = 0; i < n; ++i) {
        if (coef[i] == 0.0) continue;
        const cd c = h * coef[i];
        out.q += c * k[i].q;
        out.j += c * k[i].j;
    }
}

// Dormand-Prince 5(4) tableau.
constexpr double A2[] = {1.0 / 5};
constexpr double A3[] = {3.0 / 40, 9.0 / 40};
constexpr double A4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double A5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
constexpr double A6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                         -5103.0 / 18656};
constexpr double B5[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
constexpr double E[] = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
                        22.0 / 525, -1.0 / 40};

class Integrator {
public:
    Integrator(const LeafSpace& space, int time_chart, cd zeta, const FlowOptions& opt)
        : field_(space.field()), time_chart_(time_chart), zeta_(zeta), opt_(opt) {}

    // Derivative of the augmented state in the coordinates of `chart`.
    bool rhs(int chart, const Augmented& y, Augmented& dy) const {
        Vec2 v;
        Mat2 dv;
        field_.evaluate_timed(ChartPoint{chart, y.q}, time_chart_, v, dv);
        dy.q = zeta_ * v;
        if (opt_.want_jacobian) dy.j = zeta_ * (dv * y.j);
        else dy.j = Mat2{};
        return std::isfinite(dy.q.x.real()) && std::isfinite(dy.q.x.imag()) &&
               std::isfinite(dy.q.y.real()) && std::isfinite(dy.q.y.imag());
    }

    // Weighted error norm of the embedded estimate.
    double error_norm(const Augmented& y0, const Augmented& y1, const Augmented* k, double h) const {
        Augmented e{};
        for (int i = 0; i < 7; ++i) {
            if (E[i] == 0.0) continue;
            e.q += cd(h * E[i]) * k[i].q;
            if (opt_.want_jacobian) e.j += cd(h * E[i]) * k[i].j;
        }
        const double tol = opt_.tol;
        auto scaled = [&](cd err, cd a, cd b) {
            const double sc = tol + tol * std::max(std::abs(a), std::abs(b));
            return std::abs(err) / sc;
        };
        double m = std::max(scaled(e.q.x, y0.q.x, y1.q.x), scaled(e.q.y, y0.q.y, y1.q.y));
        if (opt_.want_jacobian) {
            m = std::max({m, scaled(e.j.a, y0.j.a, y1.j.a), scaled(e.j.b, y0.j.b, y1.j.b),
                          scaled(e.j.c, y0.j.c, y1.j.c), scaled(e.j.d, y0.j.d, y1.j.d)});
        }
        return m;
    }

private:
    const PolyVectorField& field_;
    int time_chart_;
    cd zeta_;
    const FlowOptions& opt_;
};

bool inside_forbidden(const LeafSpace& space, const ChartPoint& p, double fraction) {
    const Vec3 x = lift(p);
    for (const auto& s : space.spec->singularities)
        if (fs_distance(x, s.unit_homogeneous) < fraction * s.box_radius) return true;
    return false;
}

}  // namespace

FlowSegmentResult flow_segment(const LeafSpace& space, const ChartPoint& p, cd zeta,
                               const FlowOptions& opt) {
    FlowSegmentResult res;
    res.endpoint = p;
    res.zeta_used = zeta;
    if (zeta == cd(0.0)) return res;

    const int time_chart = opt.time_chart >= 0 ? opt.time_chart : p.chart;
    Integrator integ(space, time_chart, zeta, opt);

    int chart = p.chart;
    Augmented y{p.q, Mat2::identity()};
    Augmented k[7];
    if (!integ.rhs(chart, y, k[0])) {
        res.status = FlowStatus::NonFinite;
        return res;
    }

    // Initial step from the size of the first derivative.
    double s = 0.0;
    double h;
    {
        const double speed = norm(k[0].q) / (1.0 + norm(y.q));
        h = speed > 0.0 ? std::min(1.0, 0.02 / speed) : 1.0;
    }
    const double h_min = 1e-12;
    Augmented stage, y1;

    while (s < 1.0) {
        if (res.steps >= opt.max_steps) {
            res.status = FlowStatus::StepUnderflow;
            break;
        }
        h = std::min(h, 1.0 - s);
        bool finite = true;
        axpy(stage, y, h, k, A2, 1);
        finite &= integ.rhs(chart, stage, k[1]);
        axpy(stage, y, h, k, A3, 2);
        finite &= integ.rhs(chart, stage, k[2]);
        axpy(stage, y, h, k, A4, 3);
        finite &= integ.rhs(chart, stage, k[3]);
        axpy(stage, y, h, k, A5, 4);
        finite &= integ.rhs(chart, stage, k[4]);
        axpy(stage, y, h, k, A6, 5);
        finite &= integ.rhs(chart, stage, k[5]);
        axpy(y1, y, h, k, B5, 6);
        finite &= integ.rhs(chart, y1, k[6]);

        const double err = finite ? integ.error_norm(y, y1, k, h) : INFINITY;
        if (!(err <= 1.0)) {
            h *= finite ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.25;
            if (h < h_min) {
                res.status = FlowStatus::StepUnderflow;
                break;
            }
            continue;
        }
        ++res.steps;
        s += h;
        y = y1;
        k[0] = k[6];
        h *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;

        if (space.bidisc_domain && (std::abs(y.q.x) >= 1.0 || std::abs(y.q.y) >= 1.0)) {
            res.status = FlowStatus::LeftDomain;
            break;
        }
        if (opt.forbidden_box_fraction > 0.0 &&
            inside_forbidden(space, ChartPoint{chart, y.q}, opt.forbidden_box_fraction)) {
            res.status = FlowStatus::Forbidden;
            break;
        }
        if (max_abs(y.q) > space.switch_threshold) {
            const ChartPoint here{chart, y.q};
            const int next = best_chart(lift(here));
            if (next != chart) {
                const Mat2 t = transition_jacobian(here, next);
                y.q = to_chart(here, next).q;
                y.j = t * y.j;
                chart = next;
                ++res.chart_switches;
                if (!integ.rhs(chart, y, k[0])) {
                    res.status = FlowStatus::NonFinite;
                    break;
                }
            }
        }
    }
    res.endpoint = ChartPoint{chart, y.q};
    res.jacobian = y.j;
    return res;
}

}  // namespace folsim
