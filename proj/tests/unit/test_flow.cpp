#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "folsim/flow.hpp"
#include "folsim/philox.hpp"
#include "folsim/walker.hpp"

using namespace folsim;

TEST_CASE("zero time is the identity") {
    const FoliationSpec s = jouanolou(2);
    const LeafSpace space = LeafSpace::projective(s);
    const ChartPoint p{2, {cd(0.3, 0.2), cd(-0.1, 0.4)}};
    const FlowSegmentResult r = flow_segment(space, p, 0.0);
    REQUIRE(r.ok());
    CHECK(norm(r.endpoint.q - p.q) == 0.0);
    CHECK(frobenius(r.jacobian - Mat2::identity()) == 0.0);
    const HolonomyUpdate h =
        holonomy_increment(space, r, unit_normal(space, p, s.field.evaluate(p)));
    CHECK(std::abs(h.increment) < 1e-15);
}

TEST_CASE("linear flow") {
    const FoliationSpec s = linear_fixture(cd(0, 1));
    const LeafSpace space = LeafSpace::model(s);
    const ChartPoint p{2, {0.1, 0.1}};
    FlowOptions fo;
    fo.tol = 1e-12;
    const FlowSegmentResult r = flow_segment(space, p, 1.0, fo);
    REQUIRE(r.ok());
    const cd e = std::exp(1.0), ei = std::exp(cd(0, 1));
    CHECK(std::abs(r.endpoint.q.x - 0.1 * e) < 1e-10);
    CHECK(std::abs(r.endpoint.q.y - 0.1 * ei) < 1e-10);
    CHECK(frobenius(r.jacobian - Mat2::diag(e, ei)) < 1e-9);
}

TEST_CASE("group property and jacobian determinant") {
    const FoliationSpec s = jouanolou(2);
    const LeafSpace space = LeafSpace::projective(s);
    RngStream rng(8, 0);
    int done = 0;
    while (done < 30) {
        const auto [a, b] = rng.normal_pair();
        const auto [c, d] = rng.normal_pair();
        const auto [e, f] = rng.normal_pair();
        const Vec3 x{cd(a, b), cd(c, d), cd(e, f)};
        const ChartPoint p = from_homogeneous(x, best_chart(x));
        if (s.nearest_singularity(unit_lift(p)).distance < 0.3) continue;
        FlowOptions fo;
        fo.tol = 1e-12;
        fo.time_chart = space.time_chart(p);
        const Vec2 v = s.field.evaluate(p);
        const cd zeta = std::polar(0.4 / space.length(p, v), 2 * kPi * rng.uniform());
        const auto whole = flow_segment(space, p, zeta, fo);
        const auto first = flow_segment(space, p, 0.3 * zeta, fo);
        if (!whole.ok() || !first.ok()) continue;
        const auto second = flow_segment(space, first.endpoint, 0.7 * zeta, fo);
        if (!second.ok()) continue;
        const ChartPoint end = to_chart(second.endpoint, whole.endpoint.chart);
        CHECK(norm(end.q - whole.endpoint.q) < 1e-8 * std::max(1.0, norm(whole.endpoint.q)));
        // Jacobians compose once expressed in the same charts.
        const Mat2 into = transition_jacobian(first.endpoint, first.endpoint.chart);
        const Mat2 composed = transition_jacobian(second.endpoint, whole.endpoint.chart) *
                              second.jacobian * into * first.jacobian;
        CHECK(frobenius(composed - whole.jacobian) < 1e-7 * frobenius(whole.jacobian));
        CHECK(std::abs(det(whole.jacobian)) > 0.0);
        ++done;
    }
}

TEST_CASE("chart switching leaves endpoints unchanged") {
    const FoliationSpec s = jouanolou(3);
    const LeafSpace a = LeafSpace::projective(s, 2.5), b = LeafSpace::projective(s, 1.5);
    RngStream rng(9, 0);
    int done = 0, switched = 0;
    while (done < 30) {
        // Chart-2 points just past the lower threshold.
        const auto [u, v] = rng.uniform_pair();
        const auto [w, z] = rng.uniform_pair();
        const ChartPoint p{2, {std::polar(1.6 + 0.6 * u, 2 * kPi * v), std::polar(1.2 * w, 2 * kPi * z)}};
        if (s.nearest_singularity(unit_lift(p)).distance < 0.3) continue;
        FlowOptions fo;
        fo.tol = 1e-12;
        fo.time_chart = 2;
        const cd zeta = std::polar(0.8 / a.length(p, s.field.evaluate(p)), 2 * kPi * rng.uniform());
        const auto ra = flow_segment(a, p, zeta, fo), rb = flow_segment(b, p, zeta, fo);
        if (!ra.ok() || !rb.ok()) continue;
        switched += rb.chart_switches;
        CHECK(fs_distance(ra.endpoint, rb.endpoint) < 1e-8);
        ++done;
    }
    CHECK(switched > 0);
}

TEST_CASE("unit normal is orthogonal to the leaf") {
    const FoliationSpec s = jouanolou(2);
    const LeafSpace space = LeafSpace::projective(s);
    const ChartPoint p{0, {cd(0.4, -0.3), cd(1.2, 0.5)}};
    const Vec2 v = s.field.evaluate(p);
    const Vec2 n = unit_normal(space, p, v);
    CHECK(std::abs(space.inner(p, n, v)) < 1e-10 * space.length(p, v));
    CHECK(space.length(p, n) == doctest::Approx(1.0));
}
