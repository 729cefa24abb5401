#pragma once

#include <stdexcept>

#include "folsim/complex2.hpp"

namespace folsim {

// Linear model near a hyperbolic singular point: the unit bidisc foliated by the
// integral curves of Z = z d/dz + lambda w d/dw, Im lambda > 0, with the
// Euclidean ambient metric.

struct ModelPoint {
    cd z{}, w{};
};

inline double model_norm(const ModelPoint& x) { return std::sqrt(abs2(x.z) + abs2(x.w)); }
inline bool in_bidisc(const ModelPoint& x) { return std::abs(x.z) < 1.0 && std::abs(x.w) < 1.0; }

class SegmentExitsBidisc : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Admissible complex times {Im zeta > log|z|, Im(lambda zeta) > log|w|}; a convex
// wedge with vertex `vertex` and opening `opening` when both constraints exist.
struct SectorDescriptor {
    cd lambda{};
    double log_z = 0.0;  // -inf when z = 0
    double log_w = 0.0;  // -inf when w = 0
    cd vertex{};
    double opening = 0.0;

    bool contains(cd zeta) const;
};

struct PsiResult {
    ModelPoint point;
    bool inside = false;
};

class LocalModel {
public:
    explicit LocalModel(cd lambda);

    cd lambda() const { return lambda_; }
    // Comparability constant for the curvature bounds, measured by a frozen sweep.
    double kappa_constant() const { return kappa_c_; }

    SectorDescriptor sector(const ModelPoint& x) const;
    PsiResult psi(const ModelPoint& x, cd zeta) const;

    // Euclidean holonomy along the straight time segment [0, zeta].
    double holonomy_phi(const ModelPoint& x, cd zeta) const;
    double log_holonomy_phi(const ModelPoint& x, cd zeta) const;
    // Same without the segment check (for stencils that may straddle the edge).
    double log_holonomy_phi_unchecked(const ModelPoint& x, cd zeta) const;

    // Coefficient of i dzeta ^ dzetabar in i ddbar log Phi_x.
    double log_phi_hessian(const ModelPoint& x, cd zeta) const;

    // Curvature density at x for the leafwise generator 2 Delta_P with the clock
    // eta_asymptotic(|x|); the ratio to -rho(x) L(x)^2 is what the bounds bracket.
    double kappa_asymptotic(const ModelPoint& x) const;
    double kappa_ratio(const ModelPoint& x) const;

    struct Bounds {
        double lower = 0.0, upper = 0.0;
    };
    Bounds kappa_local_bounds(const ModelPoint& x) const;

    // Leaf Poincare density of the model from the conformal map of the sector to
    // the upper half-plane.
    double eta_exact(const ModelPoint& x) const;

    // Upper half-plane coordinate of zeta in the sector of x and its inverse.
    cd to_half_plane(const SectorDescriptor& s, cd zeta) const;
    cd from_half_plane(const SectorDescriptor& s, cd w) const;

    // Guard |zeta| <= exp(c R) |log |x||.
    bool within_depth_guard(const ModelPoint& x, cd zeta, double hyperbolic_time) const;

private:
    cd lambda_;
    double kappa_c_ = 1.0;
};

double log_star(double s);
// rho(x) = |z|^2 |w|^2 / (|z|^2 + |w|^2)^2
double separatrix_weight(const ModelPoint& x);
double weight_W(const ModelPoint& x);
double weight_Wstar(const ModelPoint& x);
double eta_asymptotic(double s);

}  // namespace folsim
