#include "folsim/disc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "folsim/philox.hpp"
#include "folsim/statistics.hpp"

namespace folsim {

double dist_P(cd a, cd b) {
    const double num = std::abs(a - b);
    const double den = std::abs(1.0 - std::conj(a) * b);
    return 2.0 * std::atanh(std::min(num / den, 1.0 - 1e-16));
}

double dist_P_origin(const DiscPoint& p) {
    // log((1+r)/(1-r)) = 2 log(1+r) - log(1-r^2)
    const double r = std::min(std::abs(p.zeta), 1.0);
    return 2.0 * std::log1p(r) - std::log(p.one_minus_r2);
}

cd mobius(cd a, double theta, cd z) {
    return std::polar(1.0, theta) * (z - a) / (1.0 - std::conj(a) * z);
}

double laplacian_P(const DiscFunction& f, cd zeta) {
    const double r = std::abs(zeta);
    const double h = 1e-4 * (1.0 - r);
    if (!(r + h < 1.0)) throw std::domain_error("laplacian_P: stencil leaves the disc");
    const double f0 = f(zeta);
    const double sum = f(zeta + h) + f(zeta - h) + f(zeta + cd(0, h)) + f(zeta - cd(0, h));
    const double dzdzbar = (sum - 4.0 * f0) / (4.0 * h * h);
    const double s = 1.0 - r * r;
    return 0.5 * s * s * dzdzbar;
}

void DiscBrownianConfig::validate() const {
    if (!(dt > 0.0) || !(t_max > 0.0)) throw std::invalid_argument("dt and t_max must be positive");
    if (dt > 1e-2 * std::max(1.0, t_max)) throw std::invalid_argument("dt too large for horizon");
}

std::int64_t DiscBrownianConfig::steps() const { return std::llround(t_max / dt); }

namespace {

constexpr double kClampRadius = 1.0 - 1e-12;

// One Euler-Maruyama step; 1 - |zeta|^2 is updated multiplicatively.
inline void disc_step(DiscPoint& p, double sqrt_dt, RngStream& rng, int& clamped) {
    const auto [n1, n2] = rng.normal_pair();
    const double s = p.one_minus_r2;
    // delta = s * e with e = sqrt(dt) (n1 + i n2) / 2
    const cd e = 0.5 * sqrt_dt * cd(n1, n2);
    const double factor = 1.0 - 2.0 * (std::conj(p.zeta) * e).real() - s * abs2(e);
    p.zeta += s * e;
    if (factor <= 0.0) {
        p.zeta *= kClampRadius / std::abs(p.zeta);
        p.one_minus_r2 = 1.0 - kClampRadius * kClampRadius;
        ++clamped;
        return;
    }
    p.one_minus_r2 = s * factor;
    if (std::abs(p.zeta) >= 1.0) {
        p.zeta *= kClampRadius / std::abs(p.zeta);
        ++clamped;
    }
}

}  // namespace

void walk_bm(const DiscBrownianConfig& cfg, std::uint64_t path_id, cd start,
             const std::function<void(std::int64_t, const DiscPoint&)>& visit) {
    cfg.validate();
    RngStream rng(cfg.seed, path_id);
    DiscPoint p = DiscPoint::from(start);
    const double sqrt_dt = std::sqrt(cfg.dt);
    const std::int64_t n = cfg.steps();
    int clamped = 0;
    visit(0, p);
    for (std::int64_t k = 1; k <= n; ++k) {
        disc_step(p, sqrt_dt, rng, clamped);
        visit(k, p);
    }
}

DiscPath sample_bm(const DiscBrownianConfig& cfg, std::uint64_t path_id, cd start) {
    cfg.validate();
    DiscPath path;
    path.dt = cfg.dt;
    RngStream rng(cfg.seed, path_id);
    DiscPoint p = DiscPoint::from(start);
    const double sqrt_dt = std::sqrt(cfg.dt);
    const std::int64_t n = cfg.steps();
    path.points.reserve(std::size_t(n + 1));
    path.points.push_back(p);
    for (std::int64_t k = 1; k <= n; ++k) {
        disc_step(p, sqrt_dt, rng, path.clamped);
        path.points.push_back(p);
    }
    return path;
}

DiffusionEstimate diffuse(const DiscFunction& f, double t, std::int64_t n_paths,
                          const DiscBrownianConfig& cfg, cd start) {
    DiscBrownianConfig c = cfg;
    c.t_max = t;
    c.validate();
    RunningStats stats;
    const double sqrt_dt = std::sqrt(c.dt);
    const std::int64_t n = c.steps();
    for (std::int64_t i = 0; i < n_paths; ++i) {
        RngStream rng(c.seed, std::uint64_t(i));
        DiscPoint p = DiscPoint::from(start);
        int clamped = 0;
        for (std::int64_t k = 0; k < n; ++k) disc_step(p, sqrt_dt, rng, clamped);
        const double v = f(p.zeta);
        if (!std::isfinite(v)) throw std::domain_error("diffuse: non-finite function value");
        stats.add(v);
    }
    return {stats.mean(), stats.std_error(), stats.min(), stats.max(), n_paths};
}

DynkinResult dynkin_residual(const DiscFunction& f, double t, std::int64_t n_paths,
                             const DiscBrownianConfig& cfg) {
    DiscBrownianConfig c = cfg;
    c.t_max = t;
    c.validate();
    constexpr int kNodes = 32;
    const std::int64_t n = c.steps();
    // Node k sits at step round(k n / 31).
    std::vector<std::int64_t> node_step(kNodes);
    for (int k = 0; k < kNodes; ++k) node_step[k] = std::llround(double(k) * n / (kNodes - 1));
    std::vector<double> lap_sum(kNodes, 0.0);
    double f_end = 0.0, fmin = 1e300, fmax = -1e300;
    const double f0 = f(0.0);

    for (std::int64_t i = 0; i < n_paths; ++i) {
        int node = 0;
        walk_bm(c, std::uint64_t(i), 0.0, [&](std::int64_t step, const DiscPoint& p) {
            while (node < kNodes && node_step[node] == step) {
                lap_sum[node] += laplacian_P(f, p.zeta);
                ++node;
            }
            if (step == n) {
                const double v = f(p.zeta);
                if (!std::isfinite(v)) throw std::domain_error("dynkin: non-finite f");
                f_end += v;
                fmin = std::min(fmin, v);
                fmax = std::max(fmax, v);
            }
        });
    }
    DynkinResult r;
    r.lhs = f_end / double(n_paths) - f0;
    const double h = t / (kNodes - 1);
    for (int k = 0; k < kNodes; ++k) {
        const double w = (k == 0 || k == kNodes - 1) ? 0.5 : 1.0;
        r.rhs += w * h * lap_sum[k] / double(n_paths);
    }
    r.residual = std::abs(r.lhs - r.rhs);
    r.f_range = std::max(fmax, f0) - std::min(fmin, f0);
    return r;
}

}  // namespace folsim
