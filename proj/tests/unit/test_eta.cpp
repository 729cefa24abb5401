#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "folsim/eta.hpp"
#include "folsim/philox.hpp"

using namespace folsim;

namespace {

const FoliationSpec& j2() {
    static const FoliationSpec s = jouanolou(2);
    return s;
}

}  // namespace

TEST_CASE("model densities") {
    const LocalModel m(cd(0, 1));
    const ModelEta exact(m, ModelEta::Kind::Exact, 3.0);
    const ModelEta asym(m, ModelEta::Kind::Asymptotic);
    const ChartPoint p{2, {cd(0.2, 0.1), cd(-0.3, 0.05)}};
    const ModelPoint x{p.q.x, p.q.y};
    CHECK(exact.estimate(p).value == doctest::Approx(3.0 * m.eta_exact(x)));
    CHECK(asym.estimate(p).value == doctest::Approx(eta_asymptotic(model_norm(x))));
    CHECK(exact.scale() == 3.0);
}

TEST_CASE("flow-disc density in the linear model is comparable to the exact one") {
    const cd lambda(0, 1);
    const LocalModel m(lambda);
    const FoliationSpec fixture = linear_fixture(lambda);
    const EtaEstimator est(LeafSpace::model(fixture));
    const double c = m.kappa_constant();
    RngStream rng(31, 0);
    for (int n = 0; n < 20; ++n) {
        const auto [a, b] = rng.uniform_pair();
        const auto [e, f] = rng.uniform_pair();
        const ModelPoint x{std::polar(0.05 + 0.4 * a, 2 * kPi * b), std::polar(0.05 + 0.4 * e, 2 * kPi * f)};
        const double ratio = est.estimate(ChartPoint{2, {x.z, x.w}}).value / m.eta_exact(x);
        INFO("ratio " << ratio);
        CHECK(ratio >= 1.0 / c);
        CHECK(ratio <= c);
    }
}

TEST_CASE("singular boxes") {
    const EtaEstimator est(LeafSpace::projective(j2()));
    const Singularity& a = j2().singularities[0];
    for (std::size_t i = 0; i < j2().singularities.size(); ++i) {
        CHECK(est.box_constant(int(i)) > 0.0);
        CHECK(std::isfinite(est.box_constant(int(i))));
    }
    // Shape along a ray into the box: log eta - log(s log* s) is constant.
    double lo = 1e300, hi = -1e300;
    for (double s : {1e-4, 1e-3, 3e-3, 1e-2}) {
        const ChartPoint p = box_boundary_points(j2(), 0, s, 1)[0];
        const EtaEstimate e = est.estimate(p);
        CHECK(e.method == EtaMethod::SingularBox);
        CHECK(e.box == 0);
        const double r = std::log(e.value) - std::log(s * log_star(s));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi - lo < 0.3);
    // Matching: the box formula equals the mean flow-disc radius on the boundary.
    const double r = a.box_radius;
    double sum = 0.0;
    const auto pts = box_boundary_points(j2(), 0, r, 64);
    for (const auto& p : pts) sum += est.flow_disc_radius(p, nullptr, 0.0).radius;
    CHECK(sum / 64.0 == doctest::Approx(est.box_constant(0) * r * log_star(r)).epsilon(1e-9));
}

TEST_CASE("scale, cap and cache") {
    EtaConfig cfg;
    cfg.scale = 2.0;
    const EtaEstimator one(LeafSpace::projective(j2())), two(LeafSpace::projective(j2()), cfg);
    const ChartPoint p{2, {cd(-0.6, 0.3), cd(0.2, -0.9)}};
    const EtaEstimate e1 = one.estimate(p), e2 = two.estimate(p);
    CHECK(e1.method == EtaMethod::FlowDisc);
    CHECK(e1.value > 0.0);
    CHECK(e2.value == doctest::Approx(2.0 * e1.value));
    CHECK(e1.trust > 0.0);
    CHECK(e1.trust <= 1.0);

    EtaConfig capped;
    capped.brody_cap = 0.5 * e1.value;
    CHECK(EtaEstimator(LeafSpace::projective(j2()), capped).estimate(p).value == capped.brody_cap);

    EtaCache cache;
    const EtaEstimate u = one.update(p, nullptr, cache);
    CHECK(u.value == e1.value);
    CHECK(cache.valid);
    // A nearby point reuses the search.
    ChartPoint q = p;
    q.q.x += 1e-6;
    const EtaEstimate v = one.update(q, nullptr, cache);
    CHECK(v.value == u.value);
}

TEST_CASE("brody sweep") {
    const EtaEstimator est(LeafSpace::projective(j2()));
    RngStream rng(41, 0);
    double top = 0.0;
    for (int n = 0; n < 40; ++n) {
        const auto [a, b] = rng.normal_pair();
        const auto [c, d] = rng.normal_pair();
        const auto [e, f] = rng.normal_pair();
        const Vec3 x{cd(a, b), cd(c, d), cd(e, f)};
        const double v = est.estimate(from_homogeneous(x, best_chart(x))).value;
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
        top = std::max(top, v);
    }
    MESSAGE("largest density in the sweep " << top);
}
