#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "folsim/complex2.hpp"

namespace folsim {

// Poincare disc with the curvature -1 metric 4|dzeta|^2/(1-|zeta|^2)^2, i.e. the
// form g_P = 2/(1-|zeta|^2)^2 i dzeta ^ dzetabar. Delta_P denotes
// ((1-|zeta|^2)^2/2) d^2/dzeta dzetabar, one half of the Laplace-Beltrami operator.

// Point of the disc together with 1 - |zeta|^2 carried to full relative precision,
// which keeps distances exact far out where |zeta| rounds to 1.
struct DiscPoint {
    cd zeta{};
    double one_minus_r2 = 1.0;

    static DiscPoint from(cd z) { return {z, 1.0 - abs2(z)}; }
};

double dist_P(cd a, cd b);
double dist_P_origin(const DiscPoint& p);

// Disc automorphism z -> e^{i theta} (z - a) / (1 - conj(a) z).
cd mobius(cd a, double theta, cd z);

using DiscFunction = std::function<double(cd)>;

// Delta_P f by a five point stencil with step 1e-4 (1 - |zeta|).
double laplacian_P(const DiscFunction& f, cd zeta);

struct DiscBrownianConfig {
    double dt = 1e-3;
    double t_max = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
    std::int64_t steps() const;
};

struct DiscPath {
    std::vector<DiscPoint> points;  // points[k] at time k * dt
    double dt = 0.0;
    int clamped = 0;                // steps that hit the 1 - 1e-12 clamp
};

// Euler-Maruyama for the diffusion with generator Delta_P:
//   zeta <- zeta + ((1-|zeta|^2)/2) sqrt(dt) (N1 + i N2).
DiscPath sample_bm(const DiscBrownianConfig& cfg, std::uint64_t path_id, cd start = 0.0);

// Walk a single path and call visit(step, point) at every step, without storing it.
void walk_bm(const DiscBrownianConfig& cfg, std::uint64_t path_id, cd start,
             const std::function<void(std::int64_t, const DiscPoint&)>& visit);

struct DiffusionEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double min = 0.0, max = 0.0;
    std::int64_t paths = 0;
};

// Monte Carlo estimate of (D_t f)(start).
DiffusionEstimate diffuse(const DiscFunction& f, double t, std::int64_t n_paths,
                          const DiscBrownianConfig& cfg, cd start = 0.0);

struct DynkinResult {
    double lhs = 0.0;       // (D_t f)(0) - f(0)
    double rhs = 0.0;       // integral of (D_s Delta_P f)(0) over [0, t]
    double residual = 0.0;  // |lhs - rhs|
    double f_range = 0.0;   // spread of f over the visited points
};

// Both sides from the same sample paths; the time integral is a 32 node trapezoid.
DynkinResult dynkin_residual(const DiscFunction& f, double t, std::int64_t n_paths,
                             const DiscBrownianConfig& cfg);

}  // namespace folsim
