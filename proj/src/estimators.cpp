#include "folsim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "folsim/local_model.hpp"

namespace folsim {

const char* to_string(EtaMode m) { return m == EtaMode::Raw ? "raw" : "calibrated"; }
const char* to_string(StartMode m) { return m == StartMode::Fixed ? "fixed" : "random"; }

EtaMode parse_eta_mode(const std::string& s) {
    if (s == "raw") return EtaMode::Raw;
    if (s == "calibrated") return EtaMode::Calibrated;
    throw std::invalid_argument("unknown eta mode '" + s + "'");
}

std::int64_t RunConfig::total_steps() const { return std::llround(t_max / dt); }
std::int64_t RunConfig::burn_steps() const { return std::llround(burn_in / dt); }
std::int64_t RunConfig::kappa_every() const {
    return std::max<std::int64_t>(1, std::llround(kappa_interval / dt));
}

void RunConfig::validate() const {
    if (!spec) throw std::invalid_argument("run needs a foliation");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(burn_in >= 0.0) || !(burn_in < t_max))
        throw std::invalid_argument("burn-in must be shorter than t_max");
    if (burn_steps() >= total_steps())
        throw std::invalid_argument("no steps left after burn-in");
    if (n_paths < 16) throw std::invalid_argument("at least 16 paths are needed");
    if (!(kappa_interval > 0.0)) throw std::invalid_argument("kappa interval must be positive");
    if (!(eta.scale > 0.0)) throw std::invalid_argument("initial beta must be positive");
    if (!model_world) spec->require_hyperbolic();
}

std::string Rational::str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

ChiPrediction predict_chi(int d) {
    if (d < 2) throw std::invalid_argument("degree must be at least 2");
    long num = -(d + 2), den = d - 1;
    const long g = std::gcd(num, den);
    ChiPrediction p;
    p.chi = {num / g, den / g};
    p.nor_degree = d + 2;
    p.cotan_degree = d - 1;
    return p;
}

std::array<ChartPoint, 2> random_start_points(std::uint64_t seed) {
    RngStream rng(seed, std::uint64_t(1) << 48);
    std::array<ChartPoint, 2> out;
    for (auto& p : out) {
        const auto [a, b] = rng.normal_pair();
        const auto [c, d] = rng.normal_pair();
        const auto [e, f] = rng.normal_pair();
        const Vec3 x{cd(a, b), cd(c, d), cd(e, f)};
        p = from_homogeneous(x, best_chart(x));
    }
    return out;
}

namespace {

std::array<ChartPoint, 2> model_start_points(std::uint64_t seed) {
    RngStream rng(seed, std::uint64_t(1) << 48);
    std::array<ChartPoint, 2> out;
    for (auto& p : out) {
        const auto [r1, a1] = rng.uniform_pair();
        const auto [r2, a2] = rng.uniform_pair();
        p = ChartPoint{2, Vec2{std::polar(0.1 + 0.4 * r1, 2 * kPi * a1),
                               std::polar(0.1 + 0.4 * r2, 2 * kPi * a2)}};
    }
    return out;
}

int trust_bin(double trust) {
    if (trust < 0.5) return 0;
    if (trust < 0.9) return 1;
    if (trust < 0.95) return 2;
    return 3;
}

}  // namespace

RunContext::RunContext(const RunConfig& cfg) : RunContext(cfg, nullptr) {}

RunContext::RunContext(const RunConfig& cfg, std::shared_ptr<const EtaProvider> eta) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.model_world) {
        space_ = LeafSpace::model(*cfg_.spec);
        if (!eta)
            eta = std::make_shared<ModelEta>(LocalModel(cfg_.model_lambda), ModelEta::Kind::Exact,
                                             cfg_.eta.scale);
        starts_ = model_start_points(cfg_.seed);
    } else {
        space_ = LeafSpace::projective(*cfg_.spec, cfg_.switch_threshold);
        // The density search keeps the default chart threshold so that the walk's
        // threshold changes only the integration charts.
        if (!eta) eta = std::make_shared<EtaEstimator>(LeafSpace::projective(*cfg_.spec), cfg_.eta);
        guard_ = std::make_unique<DepthGuard>(*cfg_.spec);
        starts_ = random_start_points(cfg_.seed);
    }
    if (cfg_.start_mode == StartMode::Fixed) starts_ = {cfg_.fixed_start, cfg_.fixed_start};
    eta_ = std::move(eta);
}

PathState RunContext::start_path(std::uint64_t path_id) const {
    PathState st;
    st.start_group = int(path_id % 2);
    st.walker = make_walker(space_, starts_[std::size_t(st.start_group)],
                            RngStream(cfg_.seed, path_id));
    return st;
}

void RunContext::sample(PathState& st) const {
    const ChartPoint& p = st.walker.point;
    const std::int64_t n = st.walker.steps;
    const std::int64_t half = cfg_.total_steps() / 2;
    double w = 1.0, ld = 0.0;
    bool in_box = false;
    double s = 1.0;
    if (cfg_.model_world) {
        const ModelPoint x{p.q.x, p.q.y};
        s = model_norm(x);
        w = weight_W(x);
        ld = log_star(s);
        in_box = true;
    } else {
        const auto near = cfg_.spec->nearest_singularity(unit_lift(p));
        const Singularity& a = cfg_.spec->singularities[std::size_t(near.index)];
        s = near.distance;
        ld = log_star(s);
        if (s < a.box_radius) {
            in_box = true;
            const ChartPoint local = to_chart(p, a.location.chart);
            Vec2 z = a.eigenbasis_inv * (local.q - a.location.q);
            const double zn = norm(z);
            const double depth = s / a.box_radius;
            if (zn > 0.0) z = (depth / zn) * z;
            w = weight_W(ModelPoint{z.x, z.y});
        }
    }
    if (in_box) st.box_steps += 1.0;
    else ++st.trust_hist[std::size_t(trust_bin(st.walker.eta_cache.trust))];
    st.w_full += w;
    st.ld_full += ld;
    if (n < half) {
        st.w_half += w;
        st.ld_half += ld;
    }
    st.window_ld += ld;
    ++st.window_n;

    if (cfg_.kappa_channel && (n - cfg_.burn_steps()) % cfg_.kappa_every() == 0) {
        double value;
        bool ok = true;
        if (kappa_override) {
            value = *kappa_override;
        } else {
            const EtaEstimate e =
                eta_->update(p, &st.walker.tangent_unit, st.walker.eta_cache);
            const KappaProbe k =
                kappa_probe(space_, p, e.value, 1e-3 * std::min(s, 1.0), cfg_.step_tol);
            ok = k.ok;
            value = k.value;
        }
        if (ok) {
            st.kappa_sum += value;
            ++st.kappa_samples;
        } else {
            ++st.kappa_failures;
        }
    }
}

void RunContext::advance(PathState& st, std::int64_t until_step) const {
    const std::int64_t total = cfg_.total_steps();
    const std::int64_t burn = cfg_.burn_steps();
    const std::int64_t window = std::max<std::int64_t>(1, std::llround(1.0 / cfg_.dt));
    until_step = std::min(until_step, total);
    StepOptions opt;
    opt.dt = cfg_.dt;
    opt.tol = cfg_.step_tol;
    opt.guard = guard_.get();
    LeafWalkerState& w = st.walker;
    while (!st.done && w.steps < until_step) {
        const std::int64_t n = w.steps;
        if (n == burn) {
            st.logh_burn = w.log_holonomy;
            st.window_logh = w.log_holonomy;
        }
        if (n >= burn) {
            if ((n - burn) % window == 0 && n > burn) {
                const double mean_ld = st.window_ld / double(st.window_n);
                st.f1_max = std::max(st.f1_max,
                                     std::abs(w.log_holonomy - st.window_logh) /
                                         (double(st.window_n) * cfg_.dt * mean_ld));
                st.window_logh = w.log_holonomy;
                st.window_ld = 0.0;
                st.window_n = 0;
            }
            sample(st);
        }
        if (!bm_step(space_, *eta_, w, opt)) {
            st.done = true;
            break;
        }
        if (n >= burn) st.eta2_sum += w.eta * w.eta;
    }
    if (w.steps >= total) st.done = true;
}

PathResult RunContext::finish(const PathState& st, std::uint64_t path_id) const {
    PathResult r;
    r.path_id = path_id;
    r.start_group = st.start_group;
    const LeafWalkerState& w = st.walker;
    r.aborted = w.aborted;
    r.abort_reason = w.abort_reason;
    r.box_entries = w.flags.box_entries;
    r.guard_trips = w.flags.guard_trips;
    r.halvings = w.flags.halvings;
    r.kappa_sum = st.kappa_sum;
    r.kappa_samples = st.kappa_samples;
    r.kappa_failures = st.kappa_failures;
    r.trust_hist = st.trust_hist;
    r.f1_constant = st.f1_max;
    if (r.aborted) return r;
    const std::int64_t total = cfg_.total_steps();
    const std::int64_t burn = cfg_.burn_steps();
    const double n_full = double(total - burn);
    const double n_half = double(std::max<std::int64_t>(1, total / 2 - burn));
    r.chi = (w.log_holonomy - st.logh_burn) / (n_full * cfg_.dt);
    r.eta2_mean = st.eta2_sum / n_full;
    r.w_full = st.w_full / n_full;
    r.logdist_full = st.ld_full / n_full;
    r.w_half = st.w_half / n_half;
    r.logdist_half = st.ld_half / n_half;
    r.box_fraction = st.box_steps / n_full;
    return r;
}

PathResult RunContext::run_path(std::uint64_t path_id) const {
    PathState st = start_path(path_id);
    advance(st, cfg_.total_steps());
    return finish(st, path_id);
}

namespace {

double combined_gap(const Interval& a, const Interval& b) {
    if (a.batches < 2 || b.batches < 2) return NAN;
    const double h = std::hypot(a.half_width(), b.half_width());
    const double gap = std::abs(a.estimate - b.estimate);
    if (gap == 0.0) return 0.0;
    return h > 0.0 ? gap / h : INFINITY;
}

}  // namespace

double mass_identity_residual(int d, double m_hat) { return std::abs(double(d - 1) * m_hat - 1.0); }

EstimatorReport make_report(const RunConfig& cfg, std::span<const PathResult> paths) {
    EstimatorReport r;
    r.family = cfg.spec->family_tag;
    r.degree = cfg.spec->degree();
    r.n_paths = cfg.n_paths;
    r.t_max = cfg.t_max;
    r.dt = cfg.dt;
    r.burn_in = cfg.burn_in;
    r.seed = cfg.seed;
    r.eta_mode = cfg.eta_mode;
    r.initial_beta = cfg.eta.scale;
    const int d = r.degree;
    if (d >= 2) r.predicted = predict_chi(d);

    const double b2 = cfg.eta.scale * cfg.eta.scale;
    std::vector<double> chi, kappa, mass, chi_g[2], mass_g[2];
    double w_half = 0, w_full = 0, ld_half = 0, ld_full = 0, box = 0;
    for (const PathResult& p : paths) {
        r.guard_trips += p.guard_trips;
        r.box_entries += p.box_entries;
        r.halvings += p.halvings;
        r.kappa_failures += p.kappa_failures;
        r.f1_constant = std::max(r.f1_constant, p.f1_constant);
        for (std::size_t i = 0; i < 4; ++i) r.trust_hist[i] += p.trust_hist[i];
        if (p.aborted) {
            ++r.aborted;
            continue;
        }
        chi.push_back(p.chi / b2);
        kappa.push_back(p.kappa_mean() / b2);
        mass.push_back(p.eta2_mean / b2);
        chi_g[p.start_group].push_back(p.chi / b2);
        mass_g[p.start_group].push_back(p.eta2_mean / b2);
        w_half += p.w_half;
        w_full += p.w_full;
        ld_half += p.logdist_half;
        ld_full += p.logdist_full;
        box += p.box_fraction;
    }
    const double nv = double(chi.size());
    if (nv > 0) {
        r.w_half = w_half / nv;
        r.w_full = w_full / nv;
        r.logdist_half = ld_half / nv;
        r.logdist_full = ld_full / nv;
        r.box_fraction = box / nv;
    }
    r.complete = paths.size() == std::size_t(cfg.n_paths);

    r.chi_cocycle_raw = batch_means(chi);
    r.chi_kappa_raw = batch_means(kappa);
    r.mass_raw = batch_means(mass);
    const double dm1 = double(std::max(1, d - 1));
    r.beta_fit = 1.0 / std::sqrt(dm1 * r.mass_raw.estimate);

    if (cfg.eta_mode == EtaMode::Calibrated) {
        std::vector<double> den(mass.size());
        std::transform(mass.begin(), mass.end(), den.begin(), [&](double m) { return dm1 * m; });
        r.chi_cocycle = ratio_batch_means(chi, den);
        r.chi_kappa = ratio_batch_means(kappa, den);
        r.mass = scaled(r.mass_raw, r.beta_fit * r.beta_fit);
        for (int g = 0; g < 2; ++g)
            r.chi_by_start[std::size_t(g)] =
                scaled(batch_means(chi_g[g]), r.beta_fit * r.beta_fit);
    } else {
        r.chi_cocycle = r.chi_cocycle_raw;
        r.chi_kappa = r.chi_kappa_raw;
        r.mass = r.mass_raw;
        for (int g = 0; g < 2; ++g) r.chi_by_start[std::size_t(g)] = batch_means(chi_g[g]);
    }
    r.residual_mass = mass_identity_residual(d, r.mass.estimate);
    r.ergodicity_z = combined_gap(r.chi_by_start[0], r.chi_by_start[1]);
    r.residual_cross = cross_consistency(r).residual;
    return r;
}

void check_abort_rate(const RunConfig& cfg, const EstimatorReport& r) {
    if (double(r.aborted) > cfg.abort_tolerance * double(cfg.n_paths))
        throw NumericalFailure(std::to_string(r.aborted) + " of " + std::to_string(cfg.n_paths) +
                               " paths aborted");
}

CrossConsistency cross_consistency(const EstimatorReport& r) {
    const Interval nor = scaled(r.mass, -double(r.degree + 2));
    CrossConsistency out;
    const double gaps[] = {combined_gap(r.chi_cocycle, r.chi_kappa),
                           combined_gap(r.chi_cocycle, nor), combined_gap(r.chi_kappa, nor)};
    out.residual = 0.0;
    for (double g : gaps) out.residual = std::isnan(g) ? g : std::max(out.residual, g);
    out.pass = out.residual <= 2.0 && r.chi_cocycle.estimate < 0.0;
    return out;
}

}  // namespace folsim
