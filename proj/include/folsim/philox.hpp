#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace folsim {

// Philox4x32-10 block function (Salmon et al. 2011).
class Philox4x32 {
public:
    using ctr_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static ctr_type generate(ctr_type ctr, key_type key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static ctr_type single_round(const ctr_type& c, const key_type& k) {
        const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
        const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
        const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

// One independent stream per (seed, stream id). Every draw consumes exactly one
// Philox block, so the full state is the block counter.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t block = 0)
        : seed_(seed), stream_(stream_id), block_(block) {}

    std::array<std::uint32_t, 4> next_block() {
        const Philox4x32::ctr_type ctr{std::uint32_t(block_), std::uint32_t(block_ >> 32),
                                       std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
        const Philox4x32::key_type key{std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
        ++block_;
        return Philox4x32::generate(ctr, key);
    }

    // Two uniforms in the open interval (0,1) with 53-bit resolution.
    std::pair<double, double> uniform_pair() {
        const auto r = next_block();
        return {to_open_unit(r[0], r[1]), to_open_unit(r[2], r[3])};
    }

    double uniform() { return uniform_pair().first; }

    // Two independent standard normals (Box-Muller).
    std::pair<double, double> normal_pair() {
        const auto [u1, u2] = uniform_pair();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * 3.14159265358979323846 * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t block() const { return block_; }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
        return (double(bits) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
};

}  // namespace folsim
