#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "folsim/walker.hpp"

using namespace folsim;

namespace {

const cd I(0.0, 1.0);

struct ModelWorld {
    FoliationSpec fixture;
    LeafSpace space;
    LocalModel model;
    ModelEta eta;
    explicit ModelWorld(cd lambda)
        : fixture(linear_fixture(lambda)),
          space(LeafSpace::model(fixture)),
          model(lambda),
          eta(model, ModelEta::Kind::Exact) {}
};

}  // namespace

TEST_CASE("zero-noise step is the identity") {
    const FoliationSpec spec = jouanolou(2);
    const LeafSpace space = LeafSpace::projective(spec);
    const EtaEstimator eta(space);
    const ChartPoint p{2, {cd(-0.6, 0.3), cd(0.2, -0.9)}};
    LeafWalkerState st = make_walker(space, p, RngStream(5, 0));
    StepOptions opt;
    opt.zero_noise = true;
    for (int n = 0; n < 5; ++n) REQUIRE(bm_step(space, eta, st, opt));
    CHECK(st.steps == 5);
    CHECK(std::abs(st.point.q.x - p.q.x) < 1e-14);
    CHECK(std::abs(st.point.q.y - p.q.y) < 1e-14);
    CHECK(std::abs(st.log_holonomy) < 1e-14);
    CHECK(st.rng.block() == 5);
}

TEST_CASE("walker holonomy in the linear model matches the closed form") {
    const ModelWorld world(cd(0.4, 1.3));
    const ModelPoint x0{cd(0.3, 0.1), cd(-0.2, 0.25)};
    LeafWalkerState st = make_walker(world.space, ChartPoint{2, {x0.z, x0.w}}, RngStream(9, 3));
    StepOptions opt;
    opt.tol = 1e-12;
    for (int n = 0; n < 400; ++n) REQUIRE(bm_step(world.space, world.eta, st, opt));
    CHECK_FALSE(st.aborted);
    const cd zeta_model = -I * st.zeta_accum;
    CHECK(std::abs(zeta_model) > 0.0);
    const double exact = world.model.log_holonomy_phi_unchecked(x0, zeta_model);
    CHECK(std::abs(st.log_holonomy - exact) < 1e-6);
}

TEST_CASE("walker stays on its leaf") {
    // Leaves of (u, lambda v) are u^lambda / v = const; along a path the product
    // u(t) = u0 e^{zeta}, v(t) = v0 e^{lambda zeta}.
    const cd lambda(0.0, 1.0);
    const ModelWorld world(lambda);
    const ChartPoint p{2, {cd(0.4, 0.0), cd(0.0, 0.3)}};
    LeafWalkerState st = make_walker(world.space, p, RngStream(13, 0));
    for (int n = 0; n < 300; ++n) REQUIRE(bm_step(world.space, world.eta, st, StepOptions{}));
    const cd zeta = st.zeta_accum;
    CHECK(std::abs(st.point.q.x - p.q.x * std::exp(zeta)) < 1e-8);
    CHECK(std::abs(st.point.q.y - p.q.y * std::exp(lambda * zeta)) < 1e-8);
}

TEST_CASE("kappa probe against the model asymptotics") {
    const ModelWorld world(I);
    for (double s : {0.3, 0.1, 0.01}) {
        const ModelPoint x{s * cd(0.6, 0.0), s * cd(0.0, 0.8)};
        const KappaProbe k =
            kappa_probe(world.space, ChartPoint{2, {x.z, x.w}}, eta_asymptotic(s), 1e-3 * s, 1e-12);
        REQUIRE(k.ok);
        CHECK(k.value < 0.0);
        CHECK(k.value == doctest::Approx(world.model.kappa_asymptotic(x)).epsilon(1e-4));
    }
}

TEST_CASE("transported frame stays orthonormal") {
    const FoliationSpec spec = jouanolou(3);
    const LeafSpace space = LeafSpace::projective(spec);
    const EtaEstimator eta(space);
    LeafWalkerState st = make_walker(space, ChartPoint{2, {cd(0.5, -0.2), cd(-0.4, 0.7)}}, RngStream(17, 0));
    for (int n = 0; n < 200; ++n) {
        REQUIRE(bm_step(space, eta, st, StepOptions{}));
        const Vec2 v = space.field().evaluate(st.point);
        CHECK(std::abs(space.inner(st.point, st.normal_unit, v)) < 1e-8 * space.length(st.point, v));
        CHECK(space.length(st.point, st.normal_unit) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(std::isfinite(st.log_holonomy));
    CHECK(st.eta > 0.0);
}

TEST_CASE("holonomy increment of a trivial segment") {
    const FoliationSpec spec = jouanolou(2);
    const LeafSpace space = LeafSpace::projective(spec);
    const ChartPoint p{2, {cd(0.3, 0.2), cd(-0.1, 0.5)}};
    const FlowSegmentResult seg = flow_segment(space, p, 0.0);
    const Vec2 n = unit_normal(space, p, space.field().evaluate(p));
    const HolonomyUpdate h = holonomy_increment(space, seg, n);
    REQUIRE(h.ok);
    CHECK(std::abs(h.increment) < 1e-14);
}
