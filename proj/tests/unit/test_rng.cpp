#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "folsim/philox.hpp"
#include "folsim/statistics.hpp"

using namespace folsim;

TEST_CASE("philox4x32-10 known answers") {
    using C = Philox4x32::ctr_type;
    using K = Philox4x32::key_type;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
          C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                               K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                               K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    for (int i = 0; i < 10; ++i) {
        const auto x = a.next_block();
        CHECK(x == b.next_block());
        CHECK(x != c.next_block());
        CHECK(x != d.next_block());
    }
}

TEST_CASE("restarting at a block counter continues the stream") {
    RngStream a(11, 2);
    for (int i = 0; i < 5; ++i) a.next_block();
    RngStream b(11, 2, 5);
    CHECK(a.next_block() == b.next_block());
}

TEST_CASE("uniforms lie in the open unit interval and normals have unit variance") {
    RngStream r(1, 0);
    RunningStats u, n;
    for (int i = 0; i < 200000; ++i) {
        const auto [x, y] = r.uniform_pair();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
        REQUIRE(y > 0.0);
        REQUIRE(y < 1.0);
        u.add(x);
        const auto [g, h] = r.normal_pair();
        n.add(g);
        n.add(h);
    }
    CHECK(u.mean() == doctest::Approx(0.5).epsilon(0.005));
    CHECK(std::abs(n.mean()) < 0.01);
    CHECK(n.variance() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("batch means interval") {
    std::vector<double> v(64);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i % 16);
    const Interval iv = batch_means(v, 16);
    CHECK(iv.estimate == doctest::Approx(7.5));
    CHECK(iv.batches == 4);
    CHECK(iv.half_width() == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<double> num{1, 2, 3, 4}, den{2, 2, 2, 2};
    const Interval r = ratio_batch_means(num, den, 2);
    CHECK(r.estimate == doctest::Approx(10.0 / 8.0));
    CHECK(student_t_quantile(0.95, 1e6) == doctest::Approx(1.95996).epsilon(1e-4));
}
