#include "folsim/walker.hpp"

#include <algorithm>
#include <cmath>

namespace folsim {

namespace {

// Distance used to cap sub-segment displacements: to the nearest singular point,
// or to the origin and the bidisc edge in the model.
double safety_distance(const LeafSpace& space, const ChartPoint& p) {
    if (space.bidisc_domain) {
        const double edge = 1.0 - max_abs(p.q);
        return std::min(std::sqrt(2.0) * norm(p.q), std::sqrt(2.0) * edge);
    }
    return space.spec->nearest_singularity(unit_lift(p)).distance;
}

}  // namespace

DepthGuard::DepthGuard(const FoliationSpec& spec) {
    for (const Singularity& a : spec.singularities) {
        Entry en;
        en.radius = a.box_radius;
        if (a.hyperbolic) en.c = LocalModel(a.ratio).kappa_constant();
        const Vec3& x = a.unit_homogeneous;
        double big = 0.0;
        for (int k = 0; k < 3; ++k) big = std::max(big, std::abs(x[k]));
        for (int k = 0; k < 3; ++k) {
            if (std::abs(x[k]) < 0.3 * big) continue;
            const ChartPoint p = from_homogeneous(x, k);
            Vec2 v;
            Mat2 dv;
            spec.field.evaluate_timed(p, k, v, dv);
            const auto [m1, m2] = eigenvalues(dv);
            en.lambda1[k] = (m2 / m1).imag() > 0.0 ? m1 : m2;
        }
        entries_.push_back(en);
    }
}

void DepthGuard::observe(LeafWalkerState& st, const EtaEstimate& e, cd dzeta, int time_chart,
                         double dt) const {
    BoxVisit& v = st.visit;
    if (e.method != EtaMethod::SingularBox || e.box < 0) {
        v.box = -1;
        return;
    }
    const Entry& en = entries_.at(std::size_t(e.box));
    if (v.box != e.box) {
        v = BoxVisit{};
        v.box = e.box;
        v.entry_norm = e.distance / en.radius;
        v.entry_step = st.steps - 1;
    }
    const cd l1 = en.lambda1[std::size_t(time_chart)];
    if (l1 == cd(0.0) || v.tripped) return;
    v.zeta += l1 * dzeta;
    const double hyperbolic_time = double(st.steps - v.entry_step) * dt;
    if (std::abs(v.zeta) > std::exp(en.c * hyperbolic_time) * std::abs(std::log(v.entry_norm))) {
        v.tripped = true;
        ++st.flags.guard_trips;
    }
}

LeafWalkerState make_walker(const LeafSpace& space, const ChartPoint& start, RngStream rng) {
    LeafWalkerState st;
    st.point = start;
    st.rng = rng;
    Vec2 v;
    Mat2 dv;
    space.field().evaluate_timed(start, space.time_chart(start), v, dv);
    const double len = space.length(start, v);
    st.tangent_unit = (1.0 / len) * v;
    st.normal_unit = unit_normal(space, start, v);
    return st;
}

HolonomyUpdate holonomy_increment(const LeafSpace& space, const FlowSegmentResult& segment,
                                  const Vec2& normal_unit) {
    HolonomyUpdate out;
    const ChartPoint& end = segment.endpoint;
    const Vec2 moved = segment.jacobian * normal_unit;
    const Vec2 tangent = space.field().evaluate(end);
    const Vec2 n_end = unit_normal(space, end, tangent);
    // Orthogonal projection onto the normal line along the leaf.
    const cd coef = 2.0 * space.inner(end, moved, n_end);
    const Vec2 projected = coef * n_end;
    const double len = std::abs(coef);
    if (!(len > 1e-14) || !std::isfinite(len)) {
        out.ok = false;
        return out;
    }
    out.increment = std::log(len);
    out.normal = (1.0 / len) * projected;
    return out;
}

bool bm_step(const LeafSpace& space, const EtaProvider& eta, LeafWalkerState& st,
             const StepOptions& opt) {
    if (st.aborted) return false;
    auto [n1, n2] = st.rng.normal_pair();
    if (opt.zero_noise) n1 = n2 = 0.0;

    const int time_chart = space.time_chart(st.point);
    Vec2 v;
    Mat2 dv;
    space.field().evaluate_timed(st.point, time_chart, v, dv);
    const cd vv = space.inner(st.point, v, v);
    const double len = std::sqrt(2.0 * vv.real());

    const EtaEstimate e = eta.update(st.point, &st.tangent_unit, st.eta_cache);
    st.eta = e.value;
    const bool in_box = e.method == EtaMethod::SingularBox;
    if (in_box) {
        ++st.flags.box_steps;
        if (!st.flags.in_box) ++st.flags.box_entries;
    }
    st.flags.in_box = in_box;

    // Phase of the tangent frame relative to V.
    const cd c = space.inner(st.point, st.tangent_unit, v) / vv;
    const cd phase = c / std::abs(c);
    const cd dzeta = (e.value * std::sqrt(2.0 * opt.dt) / len) * cd(n1, n2) * phase;
    ++st.steps;
    if (opt.guard) opt.guard->observe(st, e, dzeta, time_chart, opt.dt);
    if (dzeta == cd(0.0)) return true;

    const double displacement = std::abs(dzeta) * len;
    const double cap = std::min(opt.max_displacement, safety_distance(space, st.point) / 4.0);
    int pieces = 1;
    int halvings = 0;
    while (displacement / pieces > cap && halvings < opt.max_halvings) {
        pieces *= 2;
        ++halvings;
    }

    FlowOptions fopt;
    fopt.tol = opt.tol;
    fopt.time_chart = time_chart;
    for (;;) {
        ChartPoint p = st.point;
        Vec2 normal = st.normal_unit;
        Vec2 tangent = (1.0 / len) * (phase * v);
        double log_h = st.log_holonomy;
        bool ok = true;
        const cd piece = dzeta / double(pieces);
        for (int i = 0; i < pieces && ok; ++i) {
            const FlowSegmentResult seg = flow_segment(space, p, piece, fopt);
            if (!seg.ok()) {
                ok = false;
                break;
            }
            const HolonomyUpdate hu = holonomy_increment(space, seg, normal);
            if (!hu.ok) {
                ok = false;
                break;
            }
            log_h += hu.increment;
            normal = hu.normal;
            const Vec2 jt = seg.jacobian * tangent;
            tangent = (1.0 / space.length(seg.endpoint, jt)) * jt;
            p = seg.endpoint;
        }
        if (ok) {
            st.point = p;
            st.normal_unit = normal;
            st.tangent_unit = tangent;
            st.log_holonomy = log_h;
            st.zeta_accum += dzeta;
            st.flags.halvings += halvings;
            return true;
        }
        if (halvings >= opt.max_halvings) {
            st.aborted = true;
            st.abort_reason = "flow failed after maximal sub-segment halving";
            return false;
        }
        pieces *= 2;
        ++halvings;
    }
}

KappaProbe kappa_probe(const LeafSpace& space, const ChartPoint& p, double eta, double h,
                       double tol) {
    KappaProbe out;
    const int time_chart = space.time_chart(p);
    Vec2 v;
    Mat2 dv;
    space.field().evaluate_timed(p, time_chart, v, dv);
    const double len = space.length(p, v);
    const Vec2 n0 = unit_normal(space, p, v);
    FlowOptions fopt;
    fopt.tol = tol;
    fopt.time_chart = time_chart;
    const double guard = space.bidisc_domain ? 0.0 : 1e-8;
    const cd dirs[4] = {1.0, -1.0, cd(0, 1), cd(0, -1)};
    for (int attempt = 0; attempt <= 4; ++attempt) {
        double sum = 0.0;
        bool ok = true;
        for (const cd d : dirs) {
            const FlowSegmentResult seg = flow_segment(space, p, (h / len) * d, fopt);
            if (!seg.ok()) {
                ok = false;
                break;
            }
            if (guard > 0.0 &&
                space.spec->nearest_singularity(unit_lift(seg.endpoint)).distance < guard) {
                ok = false;
                break;
            }
            const HolonomyUpdate hu = holonomy_increment(space, seg, n0);
            if (!hu.ok) {
                ok = false;
                break;
            }
            sum += hu.increment;
        }
        if (ok) {
            // (eta^2 / |V|^2) * (sum / h_zeta^2) with h_zeta = h / |V|
            out.value = eta * eta * sum / (h * h);
            out.h = h;
            return out;
        }
        h *= 0.5;
        ++out.shrinks;
    }
    out.ok = false;
    out.value = std::nan("");
    return out;
}

}  // namespace folsim
