#include "folsim/local_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "folsim/philox.hpp"

namespace folsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double safe_log_abs(cd z) { return z == cd(0.0) ? kNegInf : std::log(std::abs(z)); }

// log(e^a + e^b) for a, b possibly -inf.
inline double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (a == kNegInf) return kNegInf;
    return a + std::log1p(std::exp(b - a));
}

constexpr std::uint64_t kCalibrationSeed = 0xCA11B8A7EULL;
constexpr int kCalibrationPoints = 10000;

}  // namespace

double log_star(double s) { return 1.0 + std::abs(std::log(s)); }

double separatrix_weight(const ModelPoint& x) {
    const double a = abs2(x.z), b = abs2(x.w);
    const double s = a + b;
    return s == 0.0 ? 0.0 : a * b / (s * s);
}

double weight_W(const ModelPoint& x) {
    const double l = log_star(model_norm(x));
    return l + separatrix_weight(x) * l * l;
}

double weight_Wstar(const ModelPoint& x) { return log_star(model_norm(x)) * weight_W(x); }

double eta_asymptotic(double s) { return s * log_star(s); }

bool SectorDescriptor::contains(cd zeta) const {
    return zeta.imag() > log_z && (lambda * zeta).imag() > log_w;
}

LocalModel::LocalModel(cd lambda) : lambda_(lambda) {
    if (!(lambda.imag() > 0.0))
        throw std::invalid_argument("local model requires Im(lambda) > 0");
    RngStream rng(kCalibrationSeed, 0);
    double c = 1.0;
    for (int i = 0; i < kCalibrationPoints; ++i) {
        const auto [u1, u2] = rng.uniform_pair();
        const auto [u3, u4] = rng.uniform_pair();
        // Log-uniform moduli so that both near-axis regimes are visited.
        const ModelPoint x{std::polar(0.5 * std::exp(-12.0 * u1), 2 * kPi * u2),
                           std::polar(0.5 * std::exp(-12.0 * u3), 2 * kPi * u4)};
        const double r = kappa_ratio(x);
        if (std::isfinite(r) && r > 0.0) c = std::max({c, r, 1.0 / r});
    }
    kappa_c_ = c;
}

SectorDescriptor LocalModel::sector(const ModelPoint& x) const {
    SectorDescriptor s;
    s.lambda = lambda_;
    s.log_z = safe_log_abs(x.z);
    s.log_w = safe_log_abs(x.w);
    s.opening = kPi - std::arg(lambda_);
    if (std::isfinite(s.log_z) && std::isfinite(s.log_w)) {
        const double u = (s.log_w - lambda_.real() * s.log_z) / lambda_.imag();
        s.vertex = cd(u, s.log_z);
    }
    return s;
}

PsiResult LocalModel::psi(const ModelPoint& x, cd zeta) const {
    const cd i(0.0, 1.0);
    PsiResult r;
    r.point = {x.z * std::exp(i * zeta), x.w * std::exp(i * lambda_ * zeta)};
    r.inside = sector(x).contains(zeta);
    return r;
}

double LocalModel::log_holonomy_phi_unchecked(const ModelPoint& x, cd zeta) const {
    // log|z'| = log|z| - Im zeta, log|lambda w'| = log|lambda w| - Im(lambda zeta)
    const double lz = safe_log_abs(x.z);
    const double lw = safe_log_abs(lambda_ * x.w);
    const double a = zeta.imag(), b = (lambda_ * zeta).imag();
    const double before = log_add_exp(2 * lz, 2 * lw);
    const double after = log_add_exp(2 * (lz - a), 2 * (lw - b));
    return -a - b + 0.5 * before - 0.5 * after;
}

double LocalModel::log_holonomy_phi(const ModelPoint& x, cd zeta) const {
    if (!sector(x).contains(zeta))
        throw SegmentExitsBidisc("holonomy segment leaves the bidisc");
    return log_holonomy_phi_unchecked(x, zeta);
}

double LocalModel::holonomy_phi(const ModelPoint& x, cd zeta) const {
    return std::exp(log_holonomy_phi(x, zeta));
}

double LocalModel::log_phi_hessian(const ModelPoint& x, cd zeta) const {
    if (!sector(x).contains(zeta))
        throw SegmentExitsBidisc("hessian point outside the sector");
    if (x.z == cd(0.0) || x.w == cd(0.0)) return 0.0;
    const double la = 2 * (std::log(std::abs(x.z)) - zeta.imag());
    const double lb = 2 * (std::log(std::abs(lambda_ * x.w)) - (lambda_ * zeta).imag());
    // AB/(A+B)^2 = r/(1+r)^2 with r = B/A
    const double lr = lb - la;
    const double frac = lr > 0 ? std::exp(-lr) / ((1 + std::exp(-lr)) * (1 + std::exp(-lr)))
                               : std::exp(lr) / ((1 + std::exp(lr)) * (1 + std::exp(lr)));
    return -0.5 * abs2(lambda_ - 1.0) * frac;
}

double LocalModel::kappa_asymptotic(const ModelPoint& x) const {
    const double s = model_norm(x);
    const double eta = eta_asymptotic(s);
    const double z2 = abs2(x.z) + abs2(lambda_ * x.w);
    return 2.0 * eta * eta * log_phi_hessian(x, 0.0) / z2;
}

double LocalModel::kappa_ratio(const ModelPoint& x) const {
    const double rho = separatrix_weight(x);
    const double l = log_star(model_norm(x));
    if (rho == 0.0) return 1.0;
    return -kappa_asymptotic(x) / (rho * l * l);
}

LocalModel::Bounds LocalModel::kappa_local_bounds(const ModelPoint& x) const {
    const double l = log_star(model_norm(x));
    const double base = separatrix_weight(x) * l * l;
    return {-kappa_c_ * base, -base / kappa_c_};
}

cd LocalModel::to_half_plane(const SectorDescriptor& s, cd zeta) const {
    const cd xi = zeta - s.vertex;
    const double p = kPi / s.opening;
    return std::polar(std::pow(std::abs(xi), p), p * std::arg(xi));
}

cd LocalModel::from_half_plane(const SectorDescriptor& s, cd w) const {
    const double p = s.opening / kPi;
    return s.vertex + std::polar(std::pow(std::abs(w), p), p * std::arg(w));
}

double LocalModel::eta_exact(const ModelPoint& x) const {
    const double zn = std::sqrt(abs2(x.z) + abs2(lambda_ * x.w));
    const SectorDescriptor s = sector(x);
    double density;  // curvature -1 density of the leaf at zeta = 0
    if (!std::isfinite(s.log_w)) {
        density = 1.0 / (-s.log_z);
    } else if (!std::isfinite(s.log_z)) {
        density = std::abs(lambda_) / (-s.log_w);
    } else {
        const cd xi = -s.vertex;
        const double p = kPi / s.opening;
        density = p / (std::abs(xi) * std::sin(p * std::arg(xi)));
    }
    return std::sqrt(2.0) * zn / density;
}

bool LocalModel::within_depth_guard(const ModelPoint& x, cd zeta, double hyperbolic_time) const {
    return std::abs(zeta) <=
           std::exp(kappa_c_ * hyperbolic_time) * std::abs(std::log(model_norm(x)));
}

}  // namespace folsim
