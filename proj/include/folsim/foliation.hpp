#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "folsim/complex2.hpp"
#include "folsim/polynomial.hpp"

namespace folsim {

// ---------------------------------------------------------------------------
// Charts of P^2. Chart k is {X_k = 1}; its affine coordinates are the two other
// homogeneous coordinates in increasing index order.

inline constexpr double kChartSwitchThreshold = 2.5;

struct ChartPoint {
    int chart = 2;
    Vec2 q{};  // (u, v)
};

std::array<int, 2> chart_axes(int chart);
Vec3 lift(const ChartPoint& p);
Vec3 unit_lift(const ChartPoint& p);
ChartPoint from_homogeneous(const Vec3& x, int chart);
ChartPoint to_chart(const ChartPoint& p, int chart);
// Chart in which the point has the largest homogeneous coordinate.
int best_chart(const Vec3& x);
inline int best_chart(const ChartPoint& p) { return best_chart(lift(p)); }
// Derivative of the transition map from p.chart to `chart`, evaluated at p.
Mat2 transition_jacobian(const ChartPoint& p, int chart);

// Hermitian coefficient matrix G of the form i * ddbar log(1 + |q|^2) in affine
// coordinates; g(a, b) = a^T G conj(b).
Mat2 fs_metric(const Vec2& q);
cd fs_inner(const Vec2& q, const Vec2& a, const Vec2& b);
// Riemannian length of a tangent vector for the metric whose Kahler form is the
// one above (ds^2 = 2 g).
double fs_norm(const Vec2& q, const Vec2& a);
// Riemannian distance for the same metric; its diameter is pi / sqrt(2).
double fs_distance(const Vec3& x, const Vec3& y);
double fs_distance(const ChartPoint& a, const ChartPoint& b);

// ---------------------------------------------------------------------------

// Degree-d foliation given by a homogeneous field F = (F0, F1, F2) of degree d on
// C^3; the chart-k field is V_k = (F_a - X_a F_k, F_b - X_b F_k) with X_k = 1.
class PolyVectorField {
public:
    PolyVectorField() = default;
    PolyVectorField(int degree, std::array<HomogeneousPoly, 3> homogeneous);

    // Field given by its two components in one chart. The degree d+1 parts must
    // be of the form g * (u, v).
    static PolyVectorField from_chart(int degree, int chart, const BivariatePoly& p,
                                      const BivariatePoly& q);

    int degree() const { return degree_; }
    const std::array<HomogeneousPoly, 3>& homogeneous() const { return hom_; }
    const BivariatePoly& p(int chart) const { return charts_[chart][0]; }
    const BivariatePoly& q(int chart) const { return charts_[chart][1]; }

    Vec2 evaluate(const ChartPoint& x) const;
    void evaluate(const ChartPoint& x, Vec2& v, Mat2& dv) const;

    // Field of chart `time_chart` expressed in the coordinates of x.chart. On the
    // overlap it equals X_k^{-(d-1)} V_{x.chart} with X_k read in x.chart.
    void evaluate_timed(const ChartPoint& x, int time_chart, Vec2& v, Mat2& dv) const;

    // Direct modification for fault injection in self tests.
    void perturb_chart_coefficient(int chart, int component, int i, int j, cd delta);

private:
    void build_charts();

    int degree_ = 0;
    std::array<HomogeneousPoly, 3> hom_;
    std::array<std::array<BivariatePoly, 2>, 3> charts_;
};

Vec2 evaluate_field(const PolyVectorField& field, const ChartPoint& p);
Mat2 jacobian(const PolyVectorField& field, const ChartPoint& p);

// ---------------------------------------------------------------------------

struct LinearClassification {
    std::array<cd, 2> eigenvalues{};
    cd ratio{};
    bool hyperbolic = false;
    bool degenerate = false;  // a zero eigenvalue
};

// Eigenvalue pair ordered so that ratio = second / first has Im >= 0.
LinearClassification classify_linear_part(const Mat2& a);

struct Singularity {
    ChartPoint location;
    std::array<cd, 2> eigenvalues{};
    cd ratio{};
    bool hyperbolic = false;
    double box_radius = 0.0;

    Vec3 unit_homogeneous{};
    // Columns are unit eigenvectors (chart coordinates) for eigenvalues[0], [1].
    Mat2 eigenbasis = Mat2::identity();
    Mat2 eigenbasis_inv = Mat2::identity();
};

inline constexpr double kBoxRadiusCap = 0.2;

Singularity classify_singularity(const PolyVectorField& field, const ChartPoint& location,
                                 double r_max = kBoxRadiusCap);

class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, std::vector<double> residuals = {})
        : std::runtime_error(what), residuals_(std::move(residuals)) {}
    const std::vector<double>& residuals() const { return residuals_; }

private:
    std::vector<double> residuals_;
};

struct RootFinderOptions {
    int starts_per_chart = 200;
    std::uint64_t seed = 0x5eed5eedULL;
    double start_radius = 1.5;
    double r_max = kBoxRadiusCap;
};

// All singular points across the three charts, polished, deduplicated and classified.
std::vector<Singularity> find_singularities(const PolyVectorField& field,
                                            const RootFinderOptions& opt = {});

// Newton polishing on the chart field; returns the final residual norm.
double polish_root(const PolyVectorField& field, ChartPoint& p, int max_iter = 50);

struct FoliationSpec {
    PolyVectorField field;
    std::vector<Singularity> singularities;
    std::string family_tag;
    std::vector<std::string> assumptions;

    int degree() const { return field.degree(); }
    // Throws if any singularity is not hyperbolic.
    void require_hyperbolic() const;

    struct Nearest {
        int index = -1;
        double distance = 1e300;
    };
    Nearest nearest_singularity(const Vec3& unit_x) const;
};

FoliationSpec make_foliation(PolyVectorField field, std::string tag,
                             const RootFinderOptions& opt = {});

// Homogeneous field (y^d, z^d, x^d).
FoliationSpec jouanolou(int d);

// i.i.d. complex Gaussian coefficients; retries until every singularity is hyperbolic.
FoliationSpec random_foliation(int d, std::uint64_t seed);

// Degree-one foliation whose chart-2 field is (u, lambda v).
FoliationSpec linear_fixture(cd lambda);

}  // namespace folsim
