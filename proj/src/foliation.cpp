#include "folsim/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "folsim/philox.hpp"

namespace folsim {

// ---------------------------------------------------------------------------
// Charts and the Fubini-Study metric

std::array<int, 2> chart_axes(int chart) {
    switch (chart) {
        case 0: return {1, 2};
        case 1: return {0, 2};
        case 2: return {0, 1};
    }
    throw std::out_of_range("chart index must be 0, 1 or 2");
}

Vec3 lift(const ChartPoint& p) {
    const auto ax = chart_axes(p.chart);
    Vec3 x{};
    x[p.chart] = 1.0;
    x[ax[0]] = p.q.x;
    x[ax[1]] = p.q.y;
    return x;
}

Vec3 unit_lift(const ChartPoint& p) {
    Vec3 x = lift(p);
    const double s = 1.0 / std::sqrt(norm2(x));
    for (auto& c : x) c *= s;
    return x;
}

ChartPoint from_homogeneous(const Vec3& x, int chart) {
    const auto ax = chart_axes(chart);
    const cd inv = 1.0 / x[chart];
    return {chart, {x[ax[0]] * inv, x[ax[1]] * inv}};
}

ChartPoint to_chart(const ChartPoint& p, int chart) {
    if (chart == p.chart) return p;
    return from_homogeneous(lift(p), chart);
}

int best_chart(const Vec3& x) {
    int k = 0;
    double m = abs2(x[0]);
    for (int i = 1; i < 3; ++i) {
        const double a = abs2(x[i]);
        if (a > m) { m = a; k = i; }
    }
    return k;
}

Mat2 transition_jacobian(const ChartPoint& p, int chart) {
    if (chart == p.chart) return Mat2::identity();
    const Vec3 x = lift(p);
    const auto src = chart_axes(p.chart);
    const auto dst = chart_axes(chart);
    const cd inv = 1.0 / x[chart];
    cd m[2][2];
    for (int r = 0; r < 2; ++r) {
        for (int s = 0; s < 2; ++s) {
            cd e = (dst[r] == src[s]) ? inv : cd(0.0);
            if (src[s] == chart) e -= x[dst[r]] * inv * inv;
            m[r][s] = e;
        }
    }
    return {m[0][0], m[0][1], m[1][0], m[1][1]};
}

Mat2 fs_metric(const Vec2& q) {
    const double s = 1.0 + norm2(q);
    const double s2 = s * s;
    const cd qx = std::conj(q.x), qy = std::conj(q.y);
    return {1.0 / s - qx * q.x / s2, -qx * q.y / s2,
            -qy * q.x / s2, 1.0 / s - qy * q.y / s2};
}

cd fs_inner(const Vec2& q, const Vec2& a, const Vec2& b) {
    const double s = 1.0 + norm2(q);
    const cd ab = a.x * std::conj(b.x) + a.y * std::conj(b.y);
    const cd aq = a.x * std::conj(q.x) + a.y * std::conj(q.y);
    const cd qb = q.x * std::conj(b.x) + q.y * std::conj(b.y);
    return ab / s - aq * qb / (s * s);
}

double fs_norm(const Vec2& q, const Vec2& a) {
    return std::sqrt(2.0 * std::max(0.0, fs_inner(q, a, a).real()));
}

double fs_distance(const Vec3& x, const Vec3& y) {
    const double cross = abs2(x[0] * y[1] - x[1] * y[0]) + abs2(x[0] * y[2] - x[2] * y[0]) +
                         abs2(x[1] * y[2] - x[2] * y[1]);
    return std::sqrt(2.0) * std::atan2(std::sqrt(cross), std::abs(hdot(x, y)));
}

double fs_distance(const ChartPoint& a, const ChartPoint& b) {
    return fs_distance(lift(a), lift(b));
}

// ---------------------------------------------------------------------------
// Polynomial vector fields

PolyVectorField::PolyVectorField(int degree, std::array<HomogeneousPoly, 3> homogeneous)
    : degree_(degree), hom_(std::move(homogeneous)) {
    if (degree < 1) throw std::invalid_argument("field degree must be positive");
    for (const auto& h : hom_)
        if (h.degree() != degree) throw std::invalid_argument("homogeneous degree mismatch");
    build_charts();
}

void PolyVectorField::build_charts() {
    for (int k = 0; k < 3; ++k) {
        const auto ax = chart_axes(k);
        for (int comp = 0; comp < 2; ++comp) {
            const int a = ax[comp];
            BivariatePoly poly;
            std::vector<BivariatePoly::Term> terms;
            for (const auto& t : hom_[a].terms()) terms.push_back({t.e[ax[0]], t.e[ax[1]], t.c});
            for (const auto& t : hom_[k].terms()) {
                auto e = t.e;
                e[a] += 1;
                terms.push_back({e[ax[0]], e[ax[1]], -t.c});
            }
            charts_[k][comp] = BivariatePoly(std::move(terms));
        }
    }
}

PolyVectorField PolyVectorField::from_chart(int degree, int chart, const BivariatePoly& p,
                                            const BivariatePoly& q) {
    if (degree < 1) throw std::invalid_argument("field degree must be positive");
    if (p.degree() > degree + 1 || q.degree() > degree + 1)
        throw std::invalid_argument("chart polynomial exceeds degree d+1");
    const auto ax = chart_axes(chart);

    // Top part g * (u, v).
    const BivariatePoly ptop = p.homogeneous_part(degree + 1);
    const BivariatePoly qtop = q.homogeneous_part(degree + 1);
    std::vector<BivariatePoly::Term> gterms;
    for (const auto& t : ptop.terms()) {
        if (t.i == 0) throw std::invalid_argument("degree d+1 part of P is not divisible by u");
        gterms.push_back({t.i - 1, t.j, t.c});
    }
    const BivariatePoly g(gterms);
    double scale = 1.0, mismatch = 0.0;
    for (const auto& t : qtop.terms()) scale = std::max(scale, std::abs(t.c));
    for (int i = 0; i <= degree + 1; ++i) {
        const int j = degree + 1 - i;
        const cd expect = j >= 1 ? g.coeff(i, j - 1) : cd(0.0);
        mismatch = std::max(mismatch, std::abs(qtop.coeff(i, j) - expect));
    }
    if (mismatch > 1e-12 * scale)
        throw std::invalid_argument("degree d+1 parts are not of the form g*(u, v)");

    std::array<HomogeneousPoly, 3> hom{HomogeneousPoly(degree), HomogeneousPoly(degree),
                                       HomogeneousPoly(degree)};
    auto homogenize = [&](const BivariatePoly& src, HomogeneousPoly& dst, double sign) {
        for (const auto& t : src.terms()) {
            std::array<int, 3> e{};
            e[ax[0]] = t.i;
            e[ax[1]] = t.j;
            e[chart] = degree - t.i - t.j;
            dst.add(e, sign * t.c);
        }
    };
    homogenize(p.truncated(degree), hom[ax[0]], 1.0);
    homogenize(q.truncated(degree), hom[ax[1]], 1.0);
    homogenize(g, hom[chart], -1.0);
    return PolyVectorField(degree, std::move(hom));
}

Vec2 PolyVectorField::evaluate(const ChartPoint& x) const {
    const auto& c = charts_[x.chart];
    return {c[0](x.q.x, x.q.y), c[1](x.q.x, x.q.y)};
}

void PolyVectorField::evaluate(const ChartPoint& x, Vec2& v, Mat2& dv) const {
    const auto& c = charts_[x.chart];
    c[0].eval(x.q.x, x.q.y, v.x, dv.a, dv.b);
    c[1].eval(x.q.x, x.q.y, v.y, dv.c, dv.d);
}

void PolyVectorField::evaluate_timed(const ChartPoint& x, int time_chart, Vec2& v,
                                     Mat2& dv) const {
    evaluate(x, v, dv);
    if (time_chart == x.chart || degree_ == 1) return;
    const auto ax = chart_axes(x.chart);
    const int idx = ax[0] == time_chart ? 0 : 1;
    const cd t = x.q[idx];
    const cd inv = 1.0 / t;
    cd f = 1.0;
    for (int k = 0; k < degree_ - 1; ++k) f *= inv;
    const cd df = -double(degree_ - 1) * f * inv;
    // d(fV) = f dV + V (grad f)^T, grad f supported on coordinate idx.
    dv *= f;
    if (idx == 0) {
        dv.a += v.x * df;
        dv.c += v.y * df;
    } else {
        dv.b += v.x * df;
        dv.d += v.y * df;
    }
    v *= f;
}

void PolyVectorField::perturb_chart_coefficient(int chart, int component, int i, int j, cd delta) {
    charts_.at(chart).at(component).add(i, j, delta);
}

Vec2 evaluate_field(const PolyVectorField& field, const ChartPoint& p) { return field.evaluate(p); }

Mat2 jacobian(const PolyVectorField& field, const ChartPoint& p) {
    Vec2 v;
    Mat2 dv;
    field.evaluate(p, v, dv);
    return dv;
}

// ---------------------------------------------------------------------------
// Singularities

LinearClassification classify_linear_part(const Mat2& a) {
    LinearClassification out;
    auto ev = eigenvalues(a);
    const double scale = std::max(std::abs(ev[0]), std::abs(ev[1]));
    if (scale == 0.0 || std::min(std::abs(ev[0]), std::abs(ev[1])) <= 1e-12 * scale) {
        out.eigenvalues = ev;
        out.degenerate = true;
        return out;
    }
    cd ratio = ev[1] / ev[0];
    if (ratio.imag() < 0.0) {
        std::swap(ev[0], ev[1]);
        ratio = ev[1] / ev[0];
    }
    out.eigenvalues = ev;
    out.ratio = ratio;
    out.hyperbolic = std::abs(ratio.imag()) > 1e-9;
    return out;
}

Singularity classify_singularity(const PolyVectorField& field, const ChartPoint& location,
                                 double r_max) {
    Singularity s;
    s.location = location;
    const Mat2 a = jacobian(field, location);
    const LinearClassification lc = classify_linear_part(a);
    if (lc.degenerate) throw SingularityError("degenerate singularity: zero eigenvalue");
    s.eigenvalues = lc.eigenvalues;
    s.ratio = lc.ratio;
    s.hyperbolic = lc.hyperbolic;
    s.box_radius = r_max;
    s.unit_homogeneous = unit_lift(location);
    const Vec2 e0 = eigenvector(a, lc.eigenvalues[0]);
    const Vec2 e1 = eigenvector(a, lc.eigenvalues[1]);
    s.eigenbasis = {e0.x, e1.x, e0.y, e1.y};
    s.eigenbasis_inv = inverse(s.eigenbasis);
    return s;
}

namespace {

// Newton step for V with the found roots divided out by linear forms c_r . (q - r).
// Falls back to a damped least-squares step when the Jacobian is singular.
bool newton_step(const Vec2& v, const Mat2& j, Vec2& delta) {
    const cd dj = det(j);
    const double scale = abs2(j.a) + abs2(j.b) + abs2(j.c) + abs2(j.d);
    if (!(scale > 0.0)) return false;
    if (std::abs(dj) > 1e-13 * scale) {
        delta = -1.0 * (inverse(j) * v);
        return true;
    }
    // (J^H J + mu I) delta = -J^H v
    const Mat2 jh{std::conj(j.a), std::conj(j.c), std::conj(j.b), std::conj(j.d)};
    Mat2 n = jh * j;
    const double mu = 1e-14 * scale;
    n.a += mu;
    n.d += mu;
    delta = -1.0 * (inverse(n) * (jh * v));
    return true;
}

struct DeflationRoot {
    Vec2 r;
    Vec2 c;
};

}  // namespace

double polish_root(const PolyVectorField& field, ChartPoint& p, int max_iter) {
    Vec2 v;
    Mat2 j;
    for (int it = 0; it < max_iter; ++it) {
        field.evaluate(p, v, j);
        Vec2 delta;
        if (!newton_step(v, j, delta)) break;
        const Vec2 next = p.q + delta;
        const double before = norm(v);
        ChartPoint trial{p.chart, next};
        const double after = norm(field.evaluate(trial));
        if (!(after <= before) && before < 1e-13) break;
        p.q = next;
        if (norm(delta) <= 1e-16 * (1.0 + norm(p.q))) break;
    }
    return norm(field.evaluate(p));
}

std::vector<Singularity> find_singularities(const PolyVectorField& field,
                                            const RootFinderOptions& opt) {
    const int d = field.degree();
    const int expected = d * d + d + 1;
    std::vector<ChartPoint> roots;
    std::vector<double> residuals;
    bool saw_degenerate = false;

    auto is_new = [&](const ChartPoint& p) {
        const Vec3 x = lift(p);
        for (const auto& r : roots)
            if (fs_distance(x, lift(r)) < 1e-7) return false;
        return true;
    };

    for (int chart = 0; chart < 3; ++chart) {
        RngStream rng(opt.seed, 1000 + std::uint64_t(chart));
        std::vector<DeflationRoot> deflate;
        auto refresh_deflation = [&]() {
            deflate.clear();
            for (std::size_t i = 0; i < roots.size(); ++i) {
                const Vec3 x = lift(roots[i]);
                if (std::abs(x[chart]) < 1e-6 * std::sqrt(norm2(x))) continue;
                const ChartPoint rc = from_homogeneous(x, chart);
                RngStream crng(opt.seed, 5000 + 17 * std::uint64_t(chart) + i);
                const auto [a, b] = crng.normal_pair();
                const auto [c, e] = crng.normal_pair();
                deflate.push_back({rc.q, {cd(a, b), cd(c, e)}});
            }
        };
        refresh_deflation();

        for (int s = 0; s < opt.starts_per_chart; ++s) {
            const auto [u1, u2] = rng.uniform_pair();
            const auto [u3, u4] = rng.uniform_pair();
            ChartPoint p{chart,
                         {std::polar(opt.start_radius * std::sqrt(u1), 2 * kPi * u2),
                          std::polar(opt.start_radius * std::sqrt(u3), 2 * kPi * u4)}};
            bool converged = false;
            for (int it = 0; it < 100; ++it) {
                Vec2 v;
                Mat2 j;
                field.evaluate(p, v, j);
                // Deflated system G = V / prod(l_r); Newton on G is Newton on
                // (J - V w^T) with w = sum c_r / l_r.
                Vec2 w{};
                for (const auto& dr : deflate) {
                    const cd l = dr.c.x * (p.q.x - dr.r.x) + dr.c.y * (p.q.y - dr.r.y);
                    if (std::abs(l) < 1e-300) continue;
                    w += (1.0 / l) * dr.c;
                }
                const Mat2 jd = j - outer(v, w);
                Vec2 delta;
                if (!newton_step(v, jd, delta)) break;
                p.q += delta;
                if (!std::isfinite(p.q.x.real()) || !std::isfinite(p.q.y.real()) ||
                    max_abs(p.q) > 1e8)
                    break;
                if (norm(delta) <= 1e-13 * (1.0 + norm(p.q))) {
                    converged = true;
                    break;
                }
            }
            if (!converged && !(norm(field.evaluate(p)) < 1e-8)) continue;
            // Re-express in the best chart before polishing.
            const Vec3 x = lift(p);
            if (!std::isfinite(std::abs(x[0])) || !std::isfinite(std::abs(x[1]))) continue;
            ChartPoint best = from_homogeneous(x, best_chart(x));
            const double res = polish_root(field, best);
            if (!(res < 1e-10)) continue;
            const Mat2 jac = jacobian(field, best);
            const double jscale = frobenius(jac);
            if (std::abs(det(jac)) <= 1e-10 * jscale * jscale) {
                saw_degenerate = true;
                residuals.push_back(res);
                continue;
            }
            if (is_new(best)) {
                roots.push_back(best);
                residuals.push_back(res);
                refresh_deflation();
            }
        }
    }

    if (saw_degenerate)
        throw SingularityError("degenerate field: singular Jacobian at a zero (non-isolated or "
                               "non-simple singular set)",
                               residuals);
    if (int(roots.size()) != expected) {
        std::ostringstream os;
        os << "root finder found " << roots.size() << " singular points, expected " << expected;
        throw SingularityError(os.str(), residuals);
    }

    std::vector<Singularity> out;
    for (const auto& r : roots) out.push_back(classify_singularity(field, r, opt.r_max));
    for (std::size_t i = 0; i < out.size(); ++i) {
        double nearest = 1e300;
        for (std::size_t j = 0; j < out.size(); ++j)
            if (i != j)
                nearest = std::min(nearest, fs_distance(out[i].unit_homogeneous,
                                                        out[j].unit_homogeneous));
        out[i].box_radius = std::min(opt.r_max, nearest / 4.0);
    }
    // Deterministic order: chart, then real and imaginary parts.
    std::sort(out.begin(), out.end(), [](const Singularity& a, const Singularity& b) {
        const auto ka = std::make_tuple(a.location.chart, a.location.q.x.real(),
                                        a.location.q.x.imag(), a.location.q.y.real());
        const auto kb = std::make_tuple(b.location.chart, b.location.q.x.real(),
                                        b.location.q.x.imag(), b.location.q.y.real());
        return ka < kb;
    });
    return out;
}

void FoliationSpec::require_hyperbolic() const {
    for (const auto& s : singularities) {
        if (!s.hyperbolic) {
            std::ostringstream os;
            os << "non-hyperbolic singularity (ratio " << s.ratio << ") in chart "
               << s.location.chart;
            throw SingularityError(os.str());
        }
    }
}

FoliationSpec::Nearest FoliationSpec::nearest_singularity(const Vec3& x) const {
    Nearest n;
    for (std::size_t i = 0; i < singularities.size(); ++i) {
        const double dist = fs_distance(x, singularities[i].unit_homogeneous);
        if (dist < n.distance) {
            n.distance = dist;
            n.index = int(i);
        }
    }
    return n;
}

FoliationSpec make_foliation(PolyVectorField field, std::string tag,
                             const RootFinderOptions& opt) {
    FoliationSpec spec;
    spec.singularities = find_singularities(field, opt);
    spec.field = std::move(field);
    spec.family_tag = std::move(tag);
    return spec;
}

FoliationSpec jouanolou(int d) {
    if (d < 2) throw std::invalid_argument("jouanolou: degree must be at least 2");
    std::array<HomogeneousPoly, 3> hom{HomogeneousPoly(d), HomogeneousPoly(d), HomogeneousPoly(d)};
    hom[0].add({0, d, 0}, 1.0);
    hom[1].add({0, 0, d}, 1.0);
    hom[2].add({d, 0, 0}, 1.0);
    return make_foliation(PolyVectorField(d, std::move(hom)), "jouanolou");
}

FoliationSpec random_foliation(int d, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("random_foliation: degree must be at least 2");
    for (std::uint64_t attempt = 0; attempt < 32; ++attempt) {
        RngStream rng(seed, attempt);
        std::array<HomogeneousPoly, 3> hom{HomogeneousPoly(d), HomogeneousPoly(d),
                                           HomogeneousPoly(d)};
        for (int comp = 0; comp < 3; ++comp)
            for (int i = 0; i <= d; ++i)
                for (int j = 0; i + j <= d; ++j) {
                    const auto [a, b] = rng.normal_pair();
                    hom[comp].add({i, j, d - i - j}, cd(a, b) / std::sqrt(2.0));
                }
        try {
            FoliationSpec spec = make_foliation(PolyVectorField(d, std::move(hom)), "random");
            bool ok = true;
            for (const auto& s : spec.singularities) ok = ok && s.hyperbolic;
            if (!ok) continue;
            spec.assumptions.push_back(
                "absence of invariant algebraic curves is assumed, not certified");
            return spec;
        } catch (const SingularityError&) {
        }
    }
    throw SingularityError("random_foliation: no nondegenerate hyperbolic sample found");
}

FoliationSpec linear_fixture(cd lambda) {
    std::array<HomogeneousPoly, 3> hom{HomogeneousPoly(1), HomogeneousPoly(1), HomogeneousPoly(1)};
    hom[0].add({1, 0, 0}, 1.0);
    hom[1].add({0, 1, 0}, lambda);
    return make_foliation(PolyVectorField(1, std::move(hom)), "linear");
}

}  // namespace folsim
