#include "folsim/eta.hpp"

#include <algorithm>
#include <cmath>

#include "folsim/philox.hpp"

namespace folsim {

const char* to_string(EtaMethod m) {
    switch (m) {
        case EtaMethod::FlowDisc: return "flow-disc";
        case EtaMethod::SingularBox: return "singular-box";
        case EtaMethod::Model: return "model";
    }
    return "unknown";
}

std::vector<ChartPoint> box_boundary_points(const FoliationSpec& spec, int singularity,
                                            double radius, int count) {
    const Singularity& a = spec.singularities.at(std::size_t(singularity));
    RngStream rng(0xB0B0DA7AULL, std::uint64_t(singularity));
    std::vector<ChartPoint> out;
    out.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        const auto [n1, n2] = rng.normal_pair();
        const auto [n3, n4] = rng.normal_pair();
        Vec2 zw{cd(n1, n2), cd(n3, n4)};
        Vec2 dir = a.eigenbasis * zw;
        dir = (1.0 / norm(dir)) * dir;
        const double speed = fs_norm(a.location.q, dir);
        double t = radius / speed;
        ChartPoint p{a.location.chart, a.location.q + t * dir};
        for (int it = 0; it < 8; ++it) {
            const double dist = fs_distance(lift(p), a.unit_homogeneous);
            t *= radius / dist;
            p.q = a.location.q + t * dir;
        }
        out.push_back(p);
    }
    return out;
}

EtaEstimator::EtaEstimator(const LeafSpace& space, EtaConfig cfg) : space_(space), cfg_(cfg) {
    if (space_.bidisc_domain) {
        cfg_.forbidden_fraction = 0.0;
        cfg_.all_time_charts = false;
        return;
    }
    const auto& sings = space_.spec->singularities;
    box_c_.assign(sings.size(), 1.0);
    for (std::size_t i = 0; i < sings.size(); ++i) {
        const double r = sings[i].box_radius;
        double sum = 0.0;
        const auto pts = box_boundary_points(*space_.spec, int(i), r, cfg_.boundary_samples);
        for (const auto& p : pts) sum += flow_disc_radius(p, nullptr, 0.0).radius;
        const double mean = sum / double(pts.size());
        box_c_[i] = mean / (r * log_star(r));
    }
}

bool EtaEstimator::disc_succeeds_in_chart(const ChartPoint& p, const Vec2* frame, double radius,
                                          int time_chart) const {
    Vec2 v;
    Mat2 dv;
    space_.field().evaluate_timed(p, time_chart, v, dv);
    const double len = space_.length(p, v);
    if (!(len > 0.0) || !std::isfinite(len)) return false;
    cd phase = 1.0;
    if (frame) {
        const cd c = space_.inner(p, *frame, v) / space_.inner(p, v, v);
        phase = c / std::abs(c);
    }
    FlowOptions opt;
    opt.tol = cfg_.ray_tol;
    opt.time_chart = time_chart;
    opt.forbidden_box_fraction = cfg_.forbidden_fraction;
    opt.want_jacobian = false;
    for (int j = 0; j < cfg_.rays; ++j) {
        const cd dir = std::polar(1.0, 2.0 * kPi * j / cfg_.rays);
        const cd zeta = (radius / len) * dir * phase;
        if (!flow_segment(space_, p, zeta, opt).ok()) return false;
    }
    return true;
}

bool EtaEstimator::disc_succeeds(const ChartPoint& p, const Vec2* frame, double radius) const {
    const int best = space_.time_chart(p);
    if (disc_succeeds_in_chart(p, frame, radius, best)) return true;
    if (!cfg_.all_time_charts) return false;
    const Vec3 x = lift(p);
    for (int k = 0; k < 3; ++k) {
        if (k == best) continue;
        // Charts where p sits almost on the pole line of the time field are useless.
        if (std::abs(x[k]) < 1e-3 * std::abs(x[best])) continue;
        if (disc_succeeds_in_chart(p, frame, radius, k)) return true;
    }
    return false;
}

EtaEstimator::DiscSearch EtaEstimator::flow_disc_radius(const ChartPoint& p, const Vec2* frame,
                                                        double hint) const {
    DiscSearch out;
    const double f = 1.0 + cfg_.rel_precision;
    auto ok = [&](double r) {
        ++out.tests;
        return disc_succeeds(p, frame, r);
    };
    const double r0 = hint > 0.0 ? hint : 0.25;
    double lo, hi;
    double g = f;
    if (ok(r0)) {
        lo = r0;
        hi = r0 * g;
        while (hi <= cfg_.max_radius && ok(hi)) {
            lo = hi;
            g *= g;
            hi = lo * g;
        }
        if (hi > cfg_.max_radius) {
            out.radius = lo;
            out.upper = INFINITY;
            return out;
        }
    } else {
        hi = r0;
        lo = r0 / g;
        while (lo >= cfg_.min_radius && !ok(lo)) {
            hi = lo;
            g *= g;
            lo = hi / g;
        }
        if (lo < cfg_.min_radius) {
            out.radius = cfg_.min_radius;
            out.upper = hi;
            return out;
        }
    }
    while (hi / lo > f) {
        const double mid = std::sqrt(lo * hi);
        if (ok(mid)) lo = mid;
        else hi = mid;
    }
    out.radius = lo;
    out.upper = hi;
    return out;
}

EtaEstimate EtaEstimator::finish(EtaEstimate e) const {
    e.value = std::min(e.value * cfg_.scale, cfg_.brody_cap);
    return e;
}

EtaEstimate EtaEstimator::estimate(const ChartPoint& p, const Vec2* frame, double hint) const {
    EtaEstimate e;
    if (!space_.bidisc_domain) {
        const auto near = space_.spec->nearest_singularity(unit_lift(p));
        const Singularity& a = space_.spec->singularities[std::size_t(near.index)];
        if (near.distance < a.box_radius) {
            e.method = EtaMethod::SingularBox;
            e.box = near.index;
            e.distance = near.distance;
            e.value = box_c_[std::size_t(near.index)] * near.distance * log_star(near.distance);
            return finish(e);
        }
    }
    const DiscSearch s = flow_disc_radius(p, frame, hint);
    e.method = EtaMethod::FlowDisc;
    e.radius = s.radius;
    e.trust = std::isfinite(s.upper) ? s.radius / s.upper : 1.0;
    e.value = s.radius;
    return finish(e);
}

EtaEstimate EtaEstimator::update(const ChartPoint& p, const Vec2* frame, EtaCache& cache) const {
    const Vec3 x = unit_lift(p);
    if (!space_.bidisc_domain) {
        const auto near = space_.spec->nearest_singularity(x);
        const Singularity& a = space_.spec->singularities[std::size_t(near.index)];
        if (near.distance < a.box_radius) {
            EtaEstimate e;
            e.method = EtaMethod::SingularBox;
            e.box = near.index;
            e.distance = near.distance;
            e.value = box_c_[std::size_t(near.index)] * near.distance * log_star(near.distance);
            return finish(e);
        }
    }
    if (cache.valid) {
        const double raw = cache.value;
        if (fs_distance(x, cache.anchor) < cfg_.refresh_distance * raw) {
            EtaEstimate e;
            e.method = EtaMethod::FlowDisc;
            e.value = raw;
            e.radius = cache.radius;
            e.trust = cache.trust;
            return finish(e);
        }
    }
    const DiscSearch s = flow_disc_radius(p, frame, cache.radius);
    cache.valid = true;
    cache.radius = s.radius;
    cache.value = s.radius;
    cache.trust = std::isfinite(s.upper) ? s.radius / s.upper : 1.0;
    cache.anchor = x;
    EtaEstimate e;
    e.method = EtaMethod::FlowDisc;
    e.value = cache.value;
    e.radius = cache.radius;
    e.trust = cache.trust;
    return finish(e);
}

EtaEstimate ModelEta::estimate(const ChartPoint& p, const Vec2*, double) const {
    const ModelPoint x{p.q.x, p.q.y};
    EtaEstimate e;
    e.method = EtaMethod::Model;
    e.value = scale_ * (kind_ == Kind::Exact ? model_.eta_exact(x) : eta_asymptotic(model_norm(x)));
    return e;
}

}  // namespace folsim
