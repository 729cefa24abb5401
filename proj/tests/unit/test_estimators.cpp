#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "folsim/checkpoint.hpp"
#include "folsim/ensemble.hpp"
#include "folsim/estimators.hpp"

using namespace folsim;

namespace {

const FoliationSpec& j2() {
    static const FoliationSpec s = jouanolou(2);
    return s;
}

RunConfig small_run() {
    RunConfig cfg;
    cfg.spec = &j2();
    cfg.n_paths = 32;
    cfg.t_max = 3.0;
    cfg.burn_in = 1.0;
    cfg.dt = 2e-3;
    cfg.seed = 7;
    return cfg;
}

Interval around(double v, double h, std::size_t batches = 8) { return {v, v - h, v + h, batches}; }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void check_identical(const std::vector<PathResult>& a, const std::vector<PathResult>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_bits(a[i].chi, b[i].chi));
        CHECK(same_bits(a[i].kappa_sum, b[i].kappa_sum));
        CHECK(same_bits(a[i].eta2_mean, b[i].eta2_mean));
        CHECK(a[i].aborted == b[i].aborted);
    }
}

}  // namespace

TEST_CASE("predicted exponent") {
    CHECK(predict_chi(2).chi == Rational{-4, 1});
    CHECK(predict_chi(3).chi == Rational{-5, 2});
    CHECK(predict_chi(5).chi == Rational{-7, 4});
    CHECK(predict_chi(4).chi.str() == "-2");
    CHECK(predict_chi(3).chi.str() == "-5/2");
    CHECK(predict_chi(3).nor_degree == 5);
    CHECK(predict_chi(3).cotan_degree == 2);
    CHECK_THROWS_AS(predict_chi(1), std::invalid_argument);
    CHECK(mass_identity_residual(3, 0.5) == 0.0);
}

TEST_CASE("configuration validation") {
    RunConfig cfg = small_run();
    CHECK_NOTHROW(cfg.validate());
    cfg.burn_in = cfg.t_max;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_run();
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_run();
    cfg.n_paths = 8;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_run();
    cfg.eta.scale = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(small_run().total_steps() == 1500);
    CHECK(small_run().burn_steps() == 500);
    CHECK(small_run().kappa_every() == 125);
}

TEST_CASE("cross consistency on synthetic channels") {
    EstimatorReport r;
    r.degree = 2;
    r.mass = around(1.0, 0.01);
    r.chi_cocycle = around(-4.0, 0.1);
    r.chi_kappa = around(-4.0, 0.1);
    CrossConsistency c = cross_consistency(r);
    CHECK(c.residual == 0.0);
    CHECK(c.pass);

    r.chi_kappa = around(-4.5, 0.1);
    c = cross_consistency(r);
    CHECK(c.residual > 2.0);
    CHECK_FALSE(c.pass);

    // A vanishing exponent fails even when the channels agree.
    r.mass = around(0.0, 0.01);
    r.chi_cocycle = around(0.0, 0.1);
    r.chi_kappa = around(0.0, 0.1);
    CHECK_FALSE(cross_consistency(r).pass);

    // Undefined spread: fewer than two batches.
    r.mass = around(1.0, 0.0, 1);
    r.chi_cocycle = around(-4.0, 0.0, 1);
    r.chi_kappa = around(-4.0, 0.0, 1);
    c = cross_consistency(r);
    CHECK(std::isnan(c.residual));
    CHECK_FALSE(c.pass);
}

TEST_CASE("kappa override and calibration") {
    RunConfig cfg = small_run();
    const RunContext ctx = [&] {
        RunContext c(cfg);
        c.kappa_override = -1.25;
        return c;
    }();
    const auto paths = run_ensemble(ctx, Execution::Serial);
    for (const PathResult& p : paths) {
        if (p.aborted) continue;
        CHECK(p.kappa_samples > 0);
        CHECK(p.kappa_mean() == doctest::Approx(-1.25).epsilon(1e-14));
    }
    const EstimatorReport r = make_report(cfg, paths);
    CHECK(r.residual_mass < 1e-12);
    CHECK(r.mass.estimate == doctest::Approx(1.0));
    CHECK(r.beta_fit > 0.0);
    CHECK(r.chi_kappa_raw.estimate == doctest::Approx(-1.25));
    CHECK(std::isfinite(r.chi_cocycle.estimate));
    CHECK(r.complete);
}

TEST_CASE("initial density scale only rescales time") {
    RunConfig base = small_run();
    base.kappa_interval = 0.25;
    const EstimatorReport ref = make_report(base, run_ensemble(RunContext(base), Execution::Parallel));
    for (double beta : {0.5, 2.0}) {
        RunConfig cfg = base;
        const double s = 1.0 / (beta * beta);
        cfg.eta.scale = beta;
        cfg.dt *= s;
        cfg.t_max *= s;
        cfg.burn_in *= s;
        cfg.kappa_interval *= s;
        const EstimatorReport r = make_report(cfg, run_ensemble(RunContext(cfg), Execution::Parallel));
        INFO("beta " << beta);
        CHECK(r.residual_cross == doctest::Approx(ref.residual_cross).epsilon(1e-9));
        CHECK(r.chi_cocycle.estimate == doctest::Approx(ref.chi_cocycle.estimate).epsilon(1e-9));
        CHECK(r.chi_cocycle_raw.estimate == doctest::Approx(ref.chi_cocycle_raw.estimate).epsilon(1e-9));
        CHECK(r.mass_raw.estimate == doctest::Approx(ref.mass_raw.estimate).epsilon(1e-9));
        CHECK(r.beta_fit == doctest::Approx(ref.beta_fit).epsilon(1e-9));
    }
}

TEST_CASE("serial and parallel ensembles agree bit for bit") {
    const RunContext ctx(small_run());
    const auto serial = run_ensemble(ctx, Execution::Serial);
    const auto parallel = run_ensemble(ctx, Execution::Parallel, 4);
    check_identical(serial, parallel);
    check_identical(parallel, run_ensemble(ctx, Execution::Parallel, 3));
}

TEST_CASE("checkpoint round trip resumes exactly") {
    const RunConfig cfg = small_run();
    const RunContext ctx(cfg);
    const auto straight = run_ensemble(ctx, Execution::Serial);

    EnsembleState state = init_ensemble(ctx);
    EnsembleOptions opt;
    opt.execution = Execution::Serial;
    opt.chunk_time = 0.5;
    opt.checkpoint_seconds = 0.0;
    nlohmann::json saved;
    opt.on_checkpoint = [&](const EnsembleState& s) {
        saved = checkpoint_to_json(Checkpoint{nlohmann::json::object(), cfg, s, {}});
        return false;
    };
    CHECK_FALSE(advance_ensemble(ctx, state, opt));
    REQUIRE(saved.is_object());
    CHECK(saved["format"] == "folsim-checkpoint");
    CHECK(saved["version"] == kCheckpointVersion);

    Checkpoint back = checkpoint_from_json(nlohmann::json::parse(saved.dump()));
    CHECK(back.state.step == state.step);
    CHECK(back.state.step > 0);
    back.config.spec = &j2();
    const RunContext again(back.config);
    opt.on_checkpoint = nullptr;
    CHECK(advance_ensemble(again, back.state, opt));
    check_identical(straight, collect_results(again, back.state));
}

TEST_CASE("hex doubles") {
    for (double v : {0.0, -0.0, 1.0, -3.25, 1e-310, 6.02214076e23, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::max()}) {
        const std::string h = hex_double(v);
        CHECK(h.size() == 16);
        CHECK(same_bits(parse_hex_double(h), v));
    }
    CHECK(hex_double(1.0) == "000000000000f03f");
    CHECK(std::isnan(parse_hex_double(hex_double(std::nan("")))));
}

TEST_CASE("model world has a negative exponent") {
    RunConfig cfg;
    const FoliationSpec fixture = linear_fixture(cd(0.0, 1.0));
    cfg.spec = &fixture;
    cfg.model_world = true;
    cfg.n_paths = 32;
    cfg.t_max = 4.0;
    cfg.burn_in = 0.5;
    cfg.dt = 1e-3;
    cfg.eta_mode = EtaMode::Raw;
    const RunContext ctx(cfg);
    const EstimatorReport r = make_report(cfg, run_ensemble(ctx));
    CHECK(r.chi_kappa_raw.estimate < 0.0);
    CHECK(r.chi_cocycle_raw.estimate < 0.0);
}
