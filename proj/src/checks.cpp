#include "folsim/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "folsim/disc.hpp"
#include "folsim/ensemble.hpp"
#include "folsim/flow.hpp"
#include "folsim/philox.hpp"
#include "folsim/report.hpp"
#include "folsim/simulate.hpp"
#include "folsim/walker.hpp"

namespace folsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ChartPoint random_fs_point(RngStream& rng) {
    const auto [a, b] = rng.normal_pair();
    const auto [c, d] = rng.normal_pair();
    const auto [e, f] = rng.normal_pair();
    const Vec3 x{cd(a, b), cd(c, d), cd(e, f)};
    return from_homogeneous(x, best_chart(x));
}

double rel_diff(const Vec2& a, const Vec2& b) {
    const double scale = std::max(norm(b), 1e-300);
    return norm(a - b) / scale;
}

double rel_diff(const Mat2& a, const Mat2& b) {
    return frobenius(a - b) / std::max(frobenius(b), 1e-300);
}

// Point of the bidisc with moduli in [lo, hi] and uniform arguments.
ModelPoint random_model_point(RngStream& rng, double lo, double hi) {
    const auto [r1, a1] = rng.uniform_pair();
    const auto [r2, a2] = rng.uniform_pair();
    return {std::polar(lo + (hi - lo) * r1, 2 * kPi * a1),
            std::polar(lo + (hi - lo) * r2, 2 * kPi * a2)};
}

// Complex time of modulus <= r_max inside the sector of x.
cd random_sector_time(RngStream& rng, const LocalModel& m, const ModelPoint& x, double r_max) {
    const SectorDescriptor s = m.sector(x);
    for (;;) {
        const auto [u, v] = rng.uniform_pair();
        const cd zeta = std::polar(r_max * u, 2 * kPi * v);
        if (s.contains(zeta)) return zeta;
    }
}

// Random lambda with Im > 0 away from the real axis.
cd random_lambda(RngStream& rng) {
    const auto [u, v] = rng.uniform_pair();
    return std::polar(0.3 * std::exp(std::log(10.0) * u), 0.1 + (kPi - 0.2) * v);
}

// Flowed model holonomy against Phi; relative error.
double model_holonomy_error(const LocalModel& m, const LeafSpace& space, const ModelPoint& x,
                            cd zeta) {
    const ChartPoint p{2, Vec2{x.z, x.w}};
    FlowOptions fo;
    fo.tol = 1e-12;
    const cd i(0.0, 1.0);
    const FlowSegmentResult seg = flow_segment(space, p, i * zeta, fo);
    if (!seg.ok()) return INFINITY;
    const Vec2 v = space.field().evaluate(p);
    const HolonomyUpdate h = holonomy_increment(space, seg, unit_normal(space, p, v));
    const double exact = m.holonomy_phi(x, zeta);
    return std::abs(std::exp(h.increment) - exact) / exact;
}

double curvature_fd_error(const LocalModel& m, const ModelPoint& x, cd zeta, double h) {
    const cd i(0.0, 1.0);
    auto f = [&](cd z) { return m.log_holonomy_phi_unchecked(x, z); };
    const double lap = (f(zeta + h) + f(zeta - h) + f(zeta + i * h) + f(zeta - i * h) -
                        4.0 * f(zeta)) /
                       (4.0 * h * h);
    const double exact = m.log_phi_hessian(x, zeta);
    return std::abs(lap - exact) / std::abs(exact);
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

CoherenceResult chart_coherence(const PolyVectorField& field, int points, std::uint64_t seed) {
    CoherenceResult r;
    RngStream rng(seed, 0);
    for (int n = 0; n < points; ++n) {
        const ChartPoint p = random_fs_point(rng);
        const Vec3 x = lift(p);
        double big = 0.0;
        for (const cd& c : x) big = std::max(big, std::abs(c));
        for (int k = 0; k < 3; ++k) {
            if (k == p.chart || std::abs(x[std::size_t(k)]) < 0.1 * big) continue;
            const ChartPoint pk = to_chart(p, k);
            const Vec2 pushed = transition_jacobian(pk, p.chart) * field.evaluate(pk);
            Vec2 v;
            Mat2 dv;
            field.evaluate_timed(p, k, v, dv);
            r.max_residual = std::max(r.max_residual, rel_diff(pushed, v));
        }
        ++r.points;
    }
    return r;
}

double log_phi_closed_form(cd lambda, cd z, cd w, cd zeta) {
    const cd i(0.0, 1.0);
    const cd z1 = z * std::exp(i * zeta);
    const cd w1 = w * std::exp(i * lambda * zeta);
    const double before = std::norm(z) + std::norm(lambda * w);
    const double after = std::norm(z1) + std::norm(lambda * w1);
    return std::log(std::abs(std::exp(i * zeta))) + std::log(std::abs(std::exp(i * lambda * zeta))) +
           0.5 * std::log(before) - 0.5 * std::log(after);
}

std::vector<ModelCheckRow> verify_local_model(cd lambda, int samples, std::uint64_t seed) {
    if (lambda.imag() == 0.0 || !std::isfinite(std::abs(lambda)))
        throw std::invalid_argument("lambda must have a nonzero imaginary part");
    if (samples < 1) throw std::invalid_argument("at least one sample is needed");
    if (lambda.imag() < 0.0) lambda = 1.0 / lambda;
    const LocalModel m(lambda);
    const FoliationSpec fixture = linear_fixture(lambda);
    const LeafSpace space = LeafSpace::model(fixture);

    std::vector<ModelCheckRow> rows{
        {"phi-at-zero", 0.0, 0.0, samples},      {"psi-at-zero", 0.0, 0.0, samples},
        {"holonomy-vs-flow", 0.0, 1e-6, samples}, {"curvature-vs-fd", 0.0, 1e-5, samples},
        {"cocycle", 0.0, 1e-12, samples},         {"flip-symmetry", 0.0, 1e-10, samples},
        {"curvature-sign", 0.0, 0.0, samples},    {"weight-sandwich", 0.0, 0.0, samples},
        {"kappa-bracket", 0.0, 1e-4, samples},
    };
    auto bump = [&](std::size_t row, double v) {
        rows[row].max_residual = std::max(rows[row].max_residual, std::isnan(v) ? INFINITY : v);
    };

    RngStream rng(seed, 0);
    for (int n = 0; n < samples; ++n) {
        const ModelPoint x = random_model_point(rng, 0.1, 0.9);
        bump(0, std::abs(m.holonomy_phi(x, 0.0) - 1.0));
        const PsiResult p0 = m.psi(x, 0.0);
        bump(1, std::abs(p0.point.z - x.z) + std::abs(p0.point.w - x.w) + (p0.inside ? 0.0 : 1.0));

        const cd zeta = random_sector_time(rng, m, x, 1.0);
        bump(2, model_holonomy_error(m, space, x, zeta));
        bump(3, curvature_fd_error(m, x, zeta, 1e-3));

        // Split the segment at a random fraction.
        const double t = rng.uniform();
        const ModelPoint mid = m.psi(x, t * zeta).point;
        const double joined = m.log_holonomy_phi(x, zeta);
        const double split = m.log_holonomy_phi(x, t * zeta) + m.log_holonomy_phi(mid, (1 - t) * zeta);
        bump(4, std::abs(joined - split));

        bump(5, std::abs(joined - log_phi_closed_form(1.0 / lambda, x.w, x.z, lambda * zeta)));

        bump(6, std::max(0.0, m.log_phi_hessian(x, zeta)));
        bump(6, std::abs(m.log_phi_hessian(ModelPoint{x.z, 0.0}, zeta)));
        bump(6, std::abs(m.log_phi_hessian(ModelPoint{0.0, x.w}, zeta)));

        const double ls = log_star(model_norm(x));
        const double w = weight_W(x);
        bump(7, std::max({0.0, 1.0 - ls, ls - w, w - 2.0 * ls * ls}));

        // Clock and stencil of the probe as in the leaf walker, depths as in the sweep
        // that fixed the comparability constant. Closer to the separatrices the
        // curvature drops below the rounding floor of the stencil.
        ModelPoint y;
        do {
            const auto [u1, u2] = rng.uniform_pair();
            const auto [u3, u4] = rng.uniform_pair();
            y = {std::polar(0.5 * std::exp(-12.0 * u1), 2 * kPi * u2),
                 std::polar(0.5 * std::exp(-12.0 * u3), 2 * kPi * u4)};
        } while (separatrix_weight(y) < 1e-3);
        const double s = model_norm(y);
        const KappaProbe k = kappa_probe(space, ChartPoint{2, Vec2{y.z, y.w}},
                                         eta_asymptotic(s), 1e-3 * s, 1e-12);
        const auto b = m.kappa_local_bounds(y);
        if (!k.ok) {
            bump(8, INFINITY);
        } else if (b.lower < 0.0) {
            bump(8, std::max({0.0, (k.value - b.upper) / -b.upper, (b.lower - k.value) / -b.lower}));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------

const char* to_string(Scale s) {
    switch (s) {
        case Scale::Quick: return "quick";
        case Scale::CTest: return "ctest";
        case Scale::Full: return "full";
    }
    return "?";
}

Scale parse_scale(const std::string& s) {
    if (s == "quick") return Scale::Quick;
    if (s == "ctest") return Scale::CTest;
    if (s == "full") return Scale::Full;
    throw std::invalid_argument("unknown scale '" + s + "'");
}

namespace {

struct ScaleParams {
    std::int64_t distance_paths;
    std::int64_t dynkin_paths;
    std::int64_t paths;
    double t_max;
    double burn_in;
};

ScaleParams params(Scale s) {
    switch (s) {
        case Scale::Quick: return {2000, 10000, 64, 20.0, 4.0};
        case Scale::CTest: return {10000, 100000, 128, 50.0, 10.0};
        case Scale::Full: return {10000, 100000, 1024, 200.0, 20.0};
    }
    return {};
}

const std::map<int, std::string>& criterion_names() {
    static const std::map<int, std::string> names{
        {0, "chart-coherence"},  {1, "local-holonomy"},     {2, "curvature-form"},
        {3, "flow-jacobian"},    {4, "disc-conventions"},   {5, "cocycle-algebra"},
        {6, "headline-d2"},      {7, "degree-trend"},       {8, "start-independence"},
        {9, "integrability"},    {10, "determinism-resume"},
    };
    return names;
}

json interval_values(const Interval& i) { return {{"estimate", i.estimate}, {"lo", i.lo}, {"hi", i.hi}}; }

}  // namespace

struct AcceptanceSuite::Runs {
    std::map<int, FoliationSpec> specs;
    std::map<int, EstimatorReport> reports;
};

AcceptanceSuite::AcceptanceSuite(SuiteOptions opt) : opt_(std::move(opt)), runs_(std::make_unique<Runs>()) {
    if (opt_.work_dir.empty()) opt_.work_dir = (fs::temp_directory_path() / "folsim-acceptance").string();
}

AcceptanceSuite::~AcceptanceSuite() = default;

const std::vector<int>& AcceptanceSuite::all_ids() {
    static const std::vector<int> ids{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return ids;
}

std::vector<CriterionResult> AcceptanceSuite::run_all(const std::vector<int>& ids) {
    std::vector<CriterionResult> out;
    for (int id : ids) out.push_back(run(id));
    return out;
}

namespace {

class Criteria {
public:
    Criteria(const SuiteOptions& opt, std::map<int, FoliationSpec>& specs,
             std::map<int, EstimatorReport>& reports)
        : opt_(opt), specs_(specs), reports_(reports) {}

    void log(const std::string& s) const {
        if (opt_.log) opt_.log(s);
    }

    const FoliationSpec& spec(int d) {
        auto it = specs_.find(d);
        if (it == specs_.end()) it = specs_.emplace(d, jouanolou(d)).first;
        return it->second;
    }

    const EstimatorReport& headline(int d) {
        if (auto it = reports_.find(d); it != reports_.end()) return it->second;
        const ScaleParams sp = params(opt_.scale);
        RunConfig cfg;
        cfg.spec = &spec(d);
        cfg.n_paths = sp.paths;
        cfg.t_max = sp.t_max;
        cfg.burn_in = sp.burn_in;
        cfg.dt = 1e-3;
        cfg.seed = 1;
        cfg.eta_mode = EtaMode::Calibrated;
        log("ensemble d=" + std::to_string(d) + " paths=" + std::to_string(sp.paths) +
            " t_max=" + fmt(sp.t_max));
        Timer t;
        const RunContext ctx(cfg);
        const auto results = run_ensemble(ctx, Execution::Parallel, opt_.threads);
        EstimatorReport r = make_report(cfg, results);
        log("ensemble d=" + std::to_string(d) + " done in " + fmt(t.seconds()) + " s");
        return reports_.emplace(d, std::move(r)).first->second;
    }

    CriterionResult coherence() {
        CriterionResult r;
        PolyVectorField field = spec(2).field;
        if (opt_.inject_fault) field.perturb_chart_coefficient(1, 0, 1, 1, cd(1e-3, 0.0));
        const CoherenceResult c = chart_coherence(field, 100, 11);
        r.pass = c.pass();
        r.detail = "max residual " + fmt(c.max_residual) + " (limit " + fmt(c.threshold) + ")";
        r.values = {{"max_residual", c.max_residual}, {"points", c.points}};
        return r;
    }

    CriterionResult local_holonomy() {
        CriterionResult r;
        RngStream rng(101, 0);
        double worst = 0.0;
        for (int n = 0; n < 100; ++n) {
            const cd lambda = random_lambda(rng);
            const LocalModel m(lambda);
            const FoliationSpec fixture = linear_fixture(lambda);
            const LeafSpace space = LeafSpace::model(fixture);
            const ModelPoint x = random_model_point(rng, 0.1, 0.9);
            const cd zeta = random_sector_time(rng, m, x, 1.0);
            worst = std::max(worst, model_holonomy_error(m, space, x, zeta));
        }
        r.pass = worst < 1e-6;
        r.detail = "max relative error " + fmt(worst) + " (limit 1e-06)";
        r.values = {{"max_relative_error", worst}};
        return r;
    }

    CriterionResult curvature_form() {
        CriterionResult r;
        RngStream rng(102, 0);
        double worst = 0.0;
        for (int n = 0; n < 100; ++n) {
            const LocalModel m(random_lambda(rng));
            const ModelPoint x = random_model_point(rng, 0.1, 0.9);
            const cd zeta = random_sector_time(rng, m, x, 1.0);
            worst = std::max(worst, curvature_fd_error(m, x, zeta, 1e-3));
        }
        r.pass = worst < 1e-4;
        r.detail = "max relative error " + fmt(worst) + " (limit 1e-04)";
        r.values = {{"max_relative_error", worst}};
        return r;
    }

    // Random point at least 0.3 away from every singularity, a time chart, and a
    // complex time moving it about 0.3 in ambient length.
    struct Segment {
        ChartPoint p;
        int chart = 2;
        cd zeta;
    };
    Segment random_segment(const LeafSpace& space, RngStream& rng) const {
        for (;;) {
            Segment s;
            s.p = random_fs_point(rng);
            if (space.spec->nearest_singularity(unit_lift(s.p)).distance < 0.3) continue;
            s.chart = space.time_chart(s.p);
            Vec2 v;
            Mat2 dv;
            space.field().evaluate_timed(s.p, s.chart, v, dv);
            s.zeta = std::polar(0.3 / space.length(s.p, v), 2 * kPi * rng.uniform());
            return s;
        }
    }

    CriterionResult flow_jacobian() {
        CriterionResult r;
        const LeafSpace space = LeafSpace::projective(spec(2));
        RngStream rng(103, 0);
        double jac = 0.0, group = 0.0;
        int done = 0, rejected = 0;
        while (done < 100) {
            const Segment s = random_segment(space, rng);
            FlowOptions fo;
            fo.tol = 1e-13;
            fo.time_chart = s.chart;
            const FlowSegmentResult base = flow_segment(space, s.p, s.zeta, fo);
            if (!base.ok()) {
                ++rejected;
                continue;
            }
            FlowOptions plain = fo;
            plain.want_jacobian = false;
            const double eps = 1e-4;
            Vec2 col[2];
            bool ok = true;
            for (int c = 0; c < 2; ++c) {
                ChartPoint plus = s.p, minus = s.p;
                plus.q[c] += eps;
                minus.q[c] -= eps;
                const auto a = flow_segment(space, plus, s.zeta, plain);
                const auto b = flow_segment(space, minus, s.zeta, plain);
                ok = ok && a.ok() && b.ok();
                if (!ok) break;
                col[c] = (1.0 / (2 * eps)) * (to_chart(a.endpoint, base.endpoint.chart).q -
                                              to_chart(b.endpoint, base.endpoint.chart).q);
            }
            const double t = 0.1 + 0.8 * rng.uniform();
            const auto first = flow_segment(space, s.p, t * s.zeta, plain);
            ok = ok && first.ok();
            FlowSegmentResult second;
            if (ok) {
                second = flow_segment(space, first.endpoint, (1 - t) * s.zeta, plain);
                ok = second.ok();
            }
            if (!ok) {
                ++rejected;
                continue;
            }
            const Mat2 fd{col[0].x, col[1].x, col[0].y, col[1].y};
            jac = std::max(jac, rel_diff(fd, base.jacobian));
            const Vec2 end = to_chart(second.endpoint, base.endpoint.chart).q;
            group = std::max(group, norm(end - base.endpoint.q) / std::max(1.0, norm(base.endpoint.q)));
            ++done;
        }
        r.pass = jac < 1e-5 && group < 1e-8;
        r.detail = "jacobian " + fmt(jac) + " (limit 1e-05), group " + fmt(group) +
                   " (limit 1e-08), " + std::to_string(rejected) + " segments redrawn";
        r.values = {{"jacobian_relative_error", jac}, {"group_relative_error", group},
                    {"segments", done}, {"redrawn", rejected}};
        return r;
    }

    CriterionResult disc_conventions() {
        CriterionResult r;
        const ScaleParams sp = params(opt_.scale);
        DiscBrownianConfig cfg;
        cfg.dt = 1e-3;
        cfg.seed = 104;
        const DiffusionEstimate one = diffuse([](cd) { return 1.0; }, 1.0, 1000, cfg);
        const bool unit = one.mean == 1.0 && one.std_error == 0.0;

        cfg.t_max = 50.0;
        RunningStats dist;
        for (std::int64_t i = 0; i < sp.distance_paths; ++i) {
            double last = 0.0;
            const std::int64_t n = cfg.steps();
            walk_bm(cfg, std::uint64_t(i), 0.0, [&](std::int64_t k, const DiscPoint& p) {
                if (k == n) last = dist_P_origin(p);
            });
            dist.add(last / 50.0);
        }
        const double drift = dist.mean();

        DiscBrownianConfig dc;
        dc.dt = 1e-3;
        dc.seed = 105;
        const DynkinResult dy =
            dynkin_residual([](cd z) { return std::norm(z); }, 2.0, sp.dynkin_paths, dc);
        const double dy_rel = dy.residual / dy.f_range;

        r.pass = unit && drift >= 0.475 && drift <= 0.525 && dy_rel < 0.02;
        r.detail = std::string("D_t 1 ") + (unit ? "exact" : "NOT exact") + ", drift " +
                   fmt(drift) + " +- " + fmt(dist.std_error()) + " (band [0.475, 0.525], " +
                   std::to_string(sp.distance_paths) + " paths), dynkin " + fmt(dy_rel) +
                   " of range (limit 0.02)";
        r.values = {{"unit_exact", unit},           {"drift", drift},
                    {"drift_std_error", dist.std_error()}, {"distance_paths", sp.distance_paths},
                    {"dynkin_lhs", dy.lhs},         {"dynkin_rhs", dy.rhs},
                    {"dynkin_relative", dy_rel},    {"dynkin_paths", sp.dynkin_paths}};
        return r;
    }

    CriterionResult cocycle_algebra() {
        CriterionResult r;
        const FoliationSpec& sp = spec(2);
        const LeafSpace space = LeafSpace::projective(sp);
        RngStream rng(106, 0);
        double split = 0.0;
        int done = 0;
        while (done < 64) {
            const Segment s = random_segment(space, rng);
            FlowOptions fo;
            fo.tol = 1e-13;
            fo.time_chart = s.chart;
            Vec2 v;
            Mat2 dv;
            space.field().evaluate_timed(s.p, s.chart, v, dv);
            const Vec2 n0 = unit_normal(space, s.p, v);
            const auto whole = flow_segment(space, s.p, s.zeta, fo);
            const auto a = flow_segment(space, s.p, 0.5 * s.zeta, fo);
            if (!whole.ok() || !a.ok()) continue;
            const auto b = flow_segment(space, a.endpoint, 0.5 * s.zeta, fo);
            if (!b.ok()) continue;
            const HolonomyUpdate hw = holonomy_increment(space, whole, n0);
            const HolonomyUpdate ha = holonomy_increment(space, a, n0);
            const HolonomyUpdate hb = holonomy_increment(space, b, ha.normal);
            split = std::max(split, std::abs(hw.increment - ha.increment - hb.increment));
            ++done;
        }

        // Same walks integrated with two chart switching thresholds.
        RunConfig base;
        base.spec = &sp;
        base.n_paths = 64;
        base.t_max = 2.0;
        base.burn_in = 0.5;
        base.seed = 106;
        base.kappa_channel = false;
        RunConfig low = base;
        low.switch_threshold = 2.0;
        const RunContext ctx_a(base), ctx_b(low);
        double chart = 0.0;
        int aborted = 0;
        for (std::uint64_t i = 0; i < 64; ++i) {
            PathState a = ctx_a.start_path(i), b = ctx_b.start_path(i);
            ctx_a.advance(a, base.total_steps());
            ctx_b.advance(b, base.total_steps());
            if (a.walker.aborted || b.walker.aborted) {
                ++aborted;
                continue;
            }
            chart = std::max(chart, std::abs(a.walker.log_holonomy - b.walker.log_holonomy));
        }
        r.pass = split < 1e-10 && chart < 1e-6 && aborted == 0;
        r.detail = "split " + fmt(split) + " (limit 1e-10), chart switch " + fmt(chart) +
                   " (limit 1e-06) over 64 paths" +
                   (aborted ? ", " + std::to_string(aborted) + " aborted" : "");
        r.values = {{"split_residual", split}, {"chart_switch_residual", chart}, {"aborted", aborted}};
        return r;
    }

    CriterionResult headline_d2() {
        CriterionResult r;
        const EstimatorReport& rep = headline(2);
        const Interval& c = rep.chi_cocycle;
        const Interval& k = rep.chi_kappa;
        const bool a = c.estimate < 0.0 && c.hi < 0.0;
        const double gap = std::abs(c.estimate - k.estimate) / std::hypot(c.half_width(), k.half_width());
        const bool b = gap <= 2.0;
        const double shape = rep.mass_raw.estimate;  // (d-1) m_raw with d = 2
        const bool cc = shape >= 0.6 && shape <= 1.7;
        const double rel = std::abs(c.estimate + 4.0) / 4.0;
        const bool d = rel <= 0.25;
        const bool aborts = double(rep.aborted) <= 0.01 * double(rep.n_paths);
        r.pass = a && b && cc && d && aborts;
        r.detail = std::string("(a) ") + (a ? "pass" : "FAIL") + " chi " + fmt(c.estimate) + " [" +
                   fmt(c.lo) + ", " + fmt(c.hi) + "]; (b) " + (b ? "pass" : "FAIL") + " gap " +
                   fmt(gap) + " half-widths; (c) " + (cc ? "pass" : "FAIL") + " (d-1)m_raw " +
                   fmt(shape) + " vs [0.6, 1.7]; (d) " + (d ? "pass" : "FAIL") + " " +
                   fmt(100 * rel) + "% from -4";
        if (!aborts) r.detail += "; aborted paths " + std::to_string(rep.aborted);
        r.values = {{"chi_cocycle", interval_values(c)},
                    {"chi_kappa", interval_values(k)},
                    {"mass_raw", interval_values(rep.mass_raw)},
                    {"beta_fit", rep.beta_fit},
                    {"channel_gap", gap},
                    {"relative_to_prediction", rel},
                    {"residual_cross", rep.residual_cross},
                    {"box_fraction", rep.box_fraction},
                    {"aborted", rep.aborted},
                    {"parts", {{"a", a}, {"b", b}, {"c", cc}, {"d", d}}}};
        return r;
    }

    CriterionResult degree_trend() {
        CriterionResult r;
        double chi[5] = {};
        for (int d = 2; d <= 4; ++d) chi[d] = headline(d).chi_cocycle.estimate;
        const bool increasing = chi[2] < chi[3] && chi[3] < chi[4];
        bool ratios = true;
        json rs = json::object();
        std::string detail = "chi(2..4) " + fmt(chi[2]) + ", " + fmt(chi[3]) + ", " + fmt(chi[4]);
        for (int d = 3; d <= 4; ++d) {
            const double want = (double(d + 2) / double(d - 1)) / 4.0;
            const double got = chi[d] / chi[2];
            const double rel = std::abs(got - want) / want;
            ratios = ratios && rel <= 0.20;
            rs[std::to_string(d)] = {{"ratio", got}, {"expected", want}, {"relative", rel}};
            detail += "; ratio d=" + std::to_string(d) + " " + fmt(got) + " vs " + fmt(want);
        }
        r.pass = increasing && ratios;
        r.detail = detail + (increasing ? "" : "; not increasing");
        r.values = {{"chi", {chi[2], chi[3], chi[4]}}, {"increasing", increasing}, {"ratios", rs}};
        return r;
    }

    CriterionResult start_independence() {
        CriterionResult r;
        const EstimatorReport& rep = headline(2);
        r.pass = std::isfinite(rep.ergodicity_z) && rep.ergodicity_z <= 1.0;
        r.detail = "start A " + fmt(rep.chi_by_start[0].estimate) + ", start B " +
                   fmt(rep.chi_by_start[1].estimate) + ", gap " + fmt(rep.ergodicity_z) +
                   " combined half-widths (limit 1)";
        r.values = {{"start_a", interval_values(rep.chi_by_start[0])},
                    {"start_b", interval_values(rep.chi_by_start[1])},
                    {"gap", rep.ergodicity_z}};
        return r;
    }

    CriterionResult integrability() {
        CriterionResult r;
        const EstimatorReport& rep = headline(2);
        const double dw = std::abs(rep.w_full - rep.w_half) / rep.w_full;
        const double dl = std::abs(rep.logdist_full - rep.logdist_half) / rep.logdist_full;
        const bool finite = std::isfinite(rep.w_full) && std::isfinite(rep.w_half) &&
                            std::isfinite(rep.logdist_full) && std::isfinite(rep.logdist_half);
        r.pass = finite && dw < 0.05 && dl < 0.05;
        r.detail = "W " + fmt(rep.w_half) + " -> " + fmt(rep.w_full) + " (" + fmt(100 * dw) +
                   "%), log*dist " + fmt(rep.logdist_half) + " -> " + fmt(rep.logdist_full) + " (" +
                   fmt(100 * dl) + "%), limit 5%";
        r.values = {{"w_half", rep.w_half},         {"w_full", rep.w_full},
                    {"logdist_half", rep.logdist_half}, {"logdist_full", rep.logdist_full},
                    {"w_change", dw},               {"logdist_change", dl}};
        return r;
    }

    CriterionResult determinism_resume() {
        CriterionResult r;
        const fs::path root = fs::path(opt_.work_dir) / "determinism";
        fs::remove_all(root);
        SimulateOptions so;
        so.foliation = {{"family", "jouanolou"}, {"degree", 2}};
        so.run.n_paths = 16;
        so.run.t_max = 12.0;
        so.run.burn_in = 2.0;
        so.run.seed = 110;
        so.threads = opt_.threads;
        auto read = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        so.out_dir = (root / "first").string();
        const SimulateOutcome first = simulate(so);
        so.out_dir = (root / "second").string();
        const SimulateOutcome second = simulate(so);

        // Serial execution, stopped at the first checkpoint and resumed in parallel.
        so.out_dir = (root / "resumed").string();
        so.execution = Execution::Serial;
        so.checkpoint_seconds = 0.0;
        so.stop_after_checkpoint = true;
        const SimulateOutcome stopped = simulate(so);
        ResumeOptions ro;
        ro.checkpoint = (root / "resumed" / "checkpoint.json").string();
        ro.threads = opt_.threads;
        const bool had_checkpoint = stopped.interrupted && fs::exists(ro.checkpoint);
        SimulateOutcome resumed;
        if (had_checkpoint) resumed = resume(ro);

        const std::string a_json = read(root / "first" / "report.json");
        const bool same_csv = read(root / "first" / "summary.csv") == read(root / "second" / "summary.csv");
        const bool same_json = a_json == read(root / "second" / "report.json");
        const bool same_resume = had_checkpoint && a_json == read(root / "resumed" / "report.json");
        r.pass = first.exit_code == kExitPass && second.exit_code == kExitPass && same_csv &&
                 same_json && same_resume;
        r.detail = std::string("repeat csv ") + (same_csv ? "identical" : "DIFFERS") +
                   ", repeat report " + (same_json ? "identical" : "DIFFERS") + ", resume " +
                   (!had_checkpoint ? "NO CHECKPOINT" : same_resume ? "identical" : "DIFFERS");
        r.values = {{"csv_identical", same_csv}, {"report_identical", same_json},
                    {"resume_identical", same_resume}};
        return r;
    }

private:
    const SuiteOptions& opt_;
    std::map<int, FoliationSpec>& specs_;
    std::map<int, EstimatorReport>& reports_;
};

}  // namespace

CriterionResult AcceptanceSuite::run(int id) {
    const auto& names = criterion_names();
    if (!names.count(id)) throw std::invalid_argument("no criterion " + std::to_string(id));
    Criteria c(opt_, runs_->specs, runs_->reports);
    c.log("criterion " + std::to_string(id) + " " + names.at(id));
    Timer t;
    CriterionResult r;
    try {
        switch (id) {
            case 0: r = c.coherence(); break;
            case 1: r = c.local_holonomy(); break;
            case 2: r = c.curvature_form(); break;
            case 3: r = c.flow_jacobian(); break;
            case 4: r = c.disc_conventions(); break;
            case 5: r = c.cocycle_algebra(); break;
            case 6: r = c.headline_d2(); break;
            case 7: r = c.degree_trend(); break;
            case 8: r = c.start_independence(); break;
            case 9: r = c.integrability(); break;
            case 10: r = c.determinism_resume(); break;
        }
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.id = id;
    r.name = names.at(id);
    r.seconds = t.seconds();
    return r;
}

json results_to_json(const std::vector<CriterionResult>& results, Scale scale) {
    json items = json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass;
        items.push_back({{"id", r.id},
                         {"name", r.name},
                         {"pass", r.pass},
                         {"detail", r.detail},
                         {"seconds", r.seconds},
                         {"values", r.values}});
    }
    return {{"format", "folsim-selftest"},
            {"version", 1},
            {"scale", to_string(scale)},
            {"all_pass", all},
            {"criteria", items}};
}

std::string result_line(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << " " << r.name << ": " << r.detail
       << "  [" << fmt(r.seconds) << " s]";
    return os.str();
}

}  // namespace folsim
