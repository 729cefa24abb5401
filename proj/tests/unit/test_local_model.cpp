#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "folsim/checks.hpp"
#include "folsim/local_model.hpp"
#include "folsim/philox.hpp"

using namespace folsim;

TEST_CASE("psi") {
    const LocalModel m(cd(0, 1));
    const ModelPoint x{0.1, 0.1};
    const PsiResult a = m.psi(x, 0.0);
    CHECK(a.point.z == x.z);
    CHECK(a.point.w == x.w);
    CHECK(a.inside);
    const PsiResult b = m.psi(x, cd(0, 1));
    CHECK(std::abs(b.point.z - 0.1 * std::exp(-1.0)) < 1e-15);
    CHECK(std::abs(b.point.w - 0.1 * cd(std::cos(1.0), -std::sin(1.0))) < 1e-15);
    CHECK(b.inside);
    const PsiResult c = m.psi(ModelPoint{0.5, 0.5}, cd(0, -2));
    CHECK(std::abs(c.point.z) == doctest::Approx(0.5 * std::exp(2.0)));
    CHECK_FALSE(c.inside);
}

TEST_CASE("holonomy values") {
    const LocalModel m(cd(0, 1));
    CHECK(m.holonomy_phi(ModelPoint{0.1, 0.1}, cd(0, 1)) == doctest::Approx(0.4883).epsilon(1e-4));
    CHECK(m.holonomy_phi(ModelPoint{0.3, cd(0.2, 0.4)}, 0.0) == 1.0);
    CHECK_THROWS_AS(m.holonomy_phi(ModelPoint{0.5, 0.5}, cd(0, -2)), SegmentExitsBidisc);
    // Closed form written independently.
    const ModelPoint x{cd(0.3, 0.1), cd(-0.2, 0.5)};
    const LocalModel g(cd(0.4, 1.3));
    const cd zeta(0.2, 0.1);
    CHECK(g.log_holonomy_phi(x, zeta) ==
          doctest::Approx(log_phi_closed_form(cd(0.4, 1.3), x.z, x.w, zeta)).epsilon(1e-13));
}

TEST_CASE("curvature of log holonomy") {
    const LocalModel m(cd(0, 1));
    for (double t : {0.05, 0.2, 0.7}) CHECK(m.log_phi_hessian(ModelPoint{t, t}, 0.0) == doctest::Approx(-0.25));
    CHECK(m.log_phi_hessian(ModelPoint{0.1, 0.0}, cd(0.3, 0.2)) == 0.0);
    const auto b = m.kappa_local_bounds(ModelPoint{0.3, 0.0});
    CHECK(b.lower == 0.0);
    CHECK(b.upper == 0.0);
}

TEST_CASE("weights") {
    const ModelPoint x{0.1, 0.1};
    CHECK(log_star(model_norm(x)) == doctest::Approx(2.9560).epsilon(1e-4));
    CHECK(separatrix_weight(x) == doctest::Approx(0.25));
    CHECK(weight_W(x) == doctest::Approx(5.1405).epsilon(1e-4));
    CHECK(weight_W(ModelPoint{0.01, 0.0}) == doctest::Approx(log_star(0.01)));
    CHECK(weight_Wstar(x) == doctest::Approx(2.9560 * 5.1405).epsilon(1e-3));
    RngStream rng(4, 0);
    for (int n = 0; n < 10000; ++n) {
        const auto [a, b] = rng.uniform_pair();
        const auto [c, d] = rng.uniform_pair();
        const ModelPoint y{std::polar(a, 2 * kPi * b), std::polar(c, 2 * kPi * d)};
        const double l = log_star(model_norm(y));
        const double w = weight_W(y);
        REQUIRE(1.0 <= l);
        REQUIRE(l <= w);
        REQUIRE(w <= 2 * l * l);
    }
    CHECK(eta_asymptotic(1e-8) < 1e-6);
    CHECK(eta_asymptotic(1e-8) / 1e-8 > eta_asymptotic(1e-4) / 1e-4);
}

TEST_CASE("sector") {
    const LocalModel m(cd(0.5, 1.0));
    RngStream rng(5, 0);
    for (int n = 0; n < 200; ++n) {
        const auto [a, b] = rng.uniform_pair();
        const auto [c, d] = rng.uniform_pair();
        const ModelPoint x{std::polar(a, 2 * kPi * b), std::polar(c, 2 * kPi * d)};
        const SectorDescriptor s = m.sector(x);
        CHECK(s.contains(0.0));
        // Convexity along a random chord between admissible times.
        const auto [u, v] = rng.normal_pair();
        const auto [p, q] = rng.normal_pair();
        const cd z1(u, v), z2(p, q);
        if (s.contains(z1) && s.contains(z2))
            for (double t = 0; t <= 1.0; t += 0.125) CHECK(s.contains(z1 + t * (z2 - z1)));
        // Membership matches the bidisc test of psi.
        CHECK(s.contains(z1) == in_bidisc(m.psi(x, z1).point));
    }
}

TEST_CASE("invariant table") {
    for (const auto& row : verify_local_model(cd(0, 1), 1000, 1)) {
        INFO(row.name << " " << row.max_residual);
        CHECK(row.pass());
    }
    const auto a = verify_local_model(cd(1, 1), 500, 3);
    const auto b = verify_local_model(1.0 / cd(1, 1), 500, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i].max_residual - b[i].max_residual) <= 1e-9);
    CHECK_THROWS_AS(verify_local_model(2.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(LocalModel(cd(1, -1)), std::invalid_argument);
}

TEST_CASE("comparability constant") {
    const LocalModel m(cd(0, 1));
    CHECK(m.kappa_constant() >= 1.0);
    CHECK(std::isfinite(m.kappa_constant()));
    // For lambda = i the curvature ratio is the same at every point.
    CHECK(m.kappa_ratio(ModelPoint{0.01, 0.2}) == doctest::Approx(m.kappa_ratio(ModelPoint{0.3, 0.001})));
}
