#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "folsim/checks.hpp"
#include "folsim/foliation.hpp"
#include "folsim/foliation_io.hpp"
#include "folsim/philox.hpp"

using namespace folsim;

namespace {

bool close(cd a, cd b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("jouanolou chart 2 field") {
    const FoliationSpec s = jouanolou(2);
    const ChartPoint origin{2, {0.0, 0.0}};
    const Vec2 v0 = s.field.evaluate(origin);
    CHECK(close(v0.x, 0.0));
    CHECK(close(v0.y, 1.0));
    const ChartPoint p{2, {cd(0.3, -0.2), cd(0.7, 0.1)}};
    const cd x = p.q.x, y = p.q.y;
    const Vec2 v = s.field.evaluate(p);
    CHECK(close(v.x, y * y - x * x * x));
    CHECK(close(v.y, 1.0 - x * x * y));
    const Vec2 one = s.field.evaluate(ChartPoint{2, {1.0, 1.0}});
    CHECK(norm(one) < 1e-14);
    const Mat2 j0 = jacobian(s.field, origin);
    CHECK(frobenius(j0) < 1e-14);
    const Mat2 j1 = jacobian(s.field, ChartPoint{2, {1.0, 1.0}});
    CHECK(close(j1.a, -3.0));
    CHECK(close(j1.b, 2.0));
    CHECK(close(j1.c, -2.0));
    CHECK(close(j1.d, -1.0));
}

TEST_CASE("classification of linear parts") {
    const auto diag = classify_linear_part(Mat2::diag(1.0, cd(0, 1)));
    CHECK(diag.hyperbolic);
    CHECK(close(diag.ratio, cd(0, 1)));
    CHECK_FALSE(classify_linear_part(Mat2::diag(1.0, 2.0)).hyperbolic);

    const auto j = classify_linear_part(Mat2{-3.0, 2.0, -2.0, -1.0});
    CHECK(j.hyperbolic);
    CHECK(close(j.ratio, cd(1.0, 4.0 * std::sqrt(3.0)) / 7.0));
    const cd e0 = j.eigenvalues[0], e1 = j.eigenvalues[1];
    CHECK(close(e0 + e1, -4.0));
    CHECK(close(e0 * e1, 7.0));
}

TEST_CASE("jouanolou singularities: count, location, hyperbolicity") {
    for (int d : {2, 3, 4}) {
        const FoliationSpec s = jouanolou(d);
        CHECK(s.singularities.size() == std::size_t(d * d + d + 1));
        for (const auto& a : s.singularities) {
            CHECK(a.hyperbolic);
            ChartPoint p = a.location;
            CHECK(norm(s.field.evaluate(p)) < 1e-12);
        }
        for (std::size_t i = 0; i < s.singularities.size(); ++i)
            for (std::size_t k = i + 1; k < s.singularities.size(); ++k)
                CHECK(fs_distance(s.singularities[i].location, s.singularities[k].location) > 0.05);
        CHECK_NOTHROW(s.require_hyperbolic());
    }
    // d = 2: x^7 = 1, y = x^-2, all on the unit torus of chart 2.
    const FoliationSpec s = jouanolou(2);
    for (const auto& a : s.singularities) {
        const ChartPoint p = to_chart(a.location, 2);
        CHECK(std::abs(std::pow(p.q.x, 7) - 1.0) < 1e-10);
        CHECK(std::abs(p.q.y - 1.0 / (p.q.x * p.q.x)) < 1e-10);
        CHECK(std::abs(p.q.x) == doctest::Approx(1.0));
        CHECK(std::abs(p.q.y) == doctest::Approx(1.0));
        CHECK(std::abs(a.ratio - cd(1.0, 4.0 * std::sqrt(3.0)) / 7.0) < 1e-9);
    }
}

TEST_CASE("chart transitions and the Fubini-Study metric") {
    RngStream rng(3, 0);
    for (int n = 0; n < 50; ++n) {
        const auto [a, b] = rng.normal_pair();
        const auto [c, d] = rng.normal_pair();
        const auto [e, f] = rng.normal_pair();
        const Vec3 x{cd(a, b), cd(c, d), cd(e, f)};
        const ChartPoint p = from_homogeneous(x, best_chart(x));
        for (int k = 0; k < 3; ++k) {
            const ChartPoint q = to_chart(p, k);
            const ChartPoint back = to_chart(q, p.chart);
            CHECK(norm(back.q - p.q) < 1e-12 * (1 + norm(p.q)));
            CHECK(fs_distance(p, q) < 1e-7);
        }
        // Transition derivative against a difference quotient.
        const int k = (p.chart + 1) % 3;
        const Mat2 t = transition_jacobian(p, k);
        const double h = 1e-6;
        ChartPoint ph = p;
        ph.q.x += h;
        const Vec2 col = (1.0 / h) * (to_chart(ph, k).q - to_chart(p, k).q);
        CHECK(std::abs(col.x - t.a) < 1e-4 * (1 + std::abs(t.a)));
        CHECK(std::abs(col.y - t.c) < 1e-4 * (1 + std::abs(t.c)));
    }
    // Diameter pi / sqrt(2) between orthogonal points.
    CHECK(fs_distance(Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 1.0, 0.0}) ==
          doctest::Approx(kPi / std::sqrt(2.0)));
}

TEST_CASE("chart coherence and fault detection") {
    const FoliationSpec s = jouanolou(3);
    CHECK(chart_coherence(s.field, 100, 1).pass());
    PolyVectorField bad = s.field;
    bad.perturb_chart_coefficient(0, 1, 0, 1, cd(0.0, 1e-4));
    CHECK_FALSE(chart_coherence(bad, 100, 1).pass());
    const FoliationSpec r = random_foliation(2, 5);
    CHECK(chart_coherence(r.field, 100, 2).pass());
    CHECK(r.singularities.size() == 7);
}

TEST_CASE("foliation documents") {
    const FoliationSpec j = foliation_from_json({{"family", "jouanolou"}, {"degree", 2}});
    CHECK(j.singularities.size() == 7);
    // Chart-2 coefficients of the degree 2 Jouanolou field.
    const nlohmann::json doc = {{"degree", 2},
                                {"chart", 2},
                                {"coefficients",
                                 {{"P", {{0, 2, 1.0, 0.0}, {3, 0, -1.0, 0.0}}},
                                  {"Q", {{0, 0, 1.0, 0.0}, {2, 1, -1.0, 0.0}}}}}};
    const FoliationSpec e = foliation_from_json(doc);
    CHECK(e.singularities.size() == 7);
    const ChartPoint p{2, {cd(0.2, 0.1), cd(-0.4, 0.3)}};
    CHECK(norm(e.field.evaluate(p) - j.field.evaluate(p)) < 1e-14);
    CHECK_THROWS(foliation_from_json({{"family", "nonsense"}, {"degree", 2}}));
    CHECK(describe_foliation(j).contains("degree"));
}
