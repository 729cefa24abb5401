// folsim: predictions, ensemble runs, local-model checks and the self test.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include <CLI11.hpp>
#include <json.hpp>

#include "folsim/checks.hpp"
#include "folsim/estimators.hpp"
#include "folsim/foliation_io.hpp"
#include "folsim/report.hpp"
#include "folsim/simulate.hpp"
#include "selftest.hpp"

using namespace folsim;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "a+bi", "a-bi", "bi", "i", "-i" or a plain real number; j is accepted for i.
cd parse_complex(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    static const std::string num = R"(((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))";
    static const std::regex real_only("^([+-]?)" + num + "$");
    static const std::regex imag_only("^([+-]?)" + num + "?[ij]$");
    static const std::regex both("^([+-]?)" + num + "([+-])" + num + "?[ij]$");
    std::smatch m;
    auto value = [](const std::string& sign, const std::string& digits) {
        const double v = digits.empty() ? 1.0 : std::stod(digits);
        return sign == "-" ? -v : v;
    };
    if (std::regex_match(s, m, real_only)) return {value(m[1], m[2]), 0.0};
    if (std::regex_match(s, m, imag_only)) return {0.0, value(m[1], m[2])};
    if (std::regex_match(s, m, both)) return {value(m[1], m[2]), value(m[3], m[4])};
    throw UsageError("cannot parse complex number '" + s + "'");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

// Keys of a run configuration file; anything else is rejected.
void apply_config_file(const json& doc, RunConfig& cfg, json& foliation) {
    if (!doc.is_object()) throw UsageError("config file must hold an object");
    for (const auto& [key, v] : doc.items()) {
        if (key == "foliation") foliation = v;
        else if (key == "n_paths") cfg.n_paths = v.get<std::int64_t>();
        else if (key == "t_max") cfg.t_max = v.get<double>();
        else if (key == "dt") cfg.dt = v.get<double>();
        else if (key == "burn_in") cfg.burn_in = v.get<double>();
        else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
        else if (key == "eta_mode") cfg.eta_mode = parse_eta_mode(v.get<std::string>());
        else if (key == "start_mode") {
            const auto s = v.get<std::string>();
            if (s != "random") throw UsageError("only random start points are configurable");
        }
        else if (key == "kappa_interval") cfg.kappa_interval = v.get<double>();
        else if (key == "kappa_channel") cfg.kappa_channel = v.get<bool>();
        else if (key == "switch_threshold") cfg.switch_threshold = v.get<double>();
        else if (key == "step_tol") cfg.step_tol = v.get<double>();
        else if (key == "abort_tolerance") cfg.abort_tolerance = v.get<double>();
        else if (key == "initial_beta") cfg.eta.scale = v.get<double>();
        else if (key == "eta") {
            for (const auto& [k, e] : v.items()) {
                if (k == "rays") cfg.eta.rays = e.get<int>();
                else if (k == "rel_precision") cfg.eta.rel_precision = e.get<double>();
                else if (k == "ray_tol") cfg.eta.ray_tol = e.get<double>();
                else if (k == "forbidden_fraction") cfg.eta.forbidden_fraction = e.get<double>();
                else if (k == "max_radius") cfg.eta.max_radius = e.get<double>();
                else if (k == "brody_cap") cfg.eta.brody_cap = e.is_null() ? INFINITY : e.get<double>();
                else if (k == "initial_beta") cfg.eta.scale = e.get<double>();
                else if (k == "all_time_charts") cfg.eta.all_time_charts = e.get<bool>();
                else if (k == "refresh_distance") cfg.eta.refresh_distance = e.get<double>();
                else if (k == "boundary_samples") cfg.eta.boundary_samples = e.get<int>();
                else throw UsageError("unknown eta key '" + k + "'");
            }
        } else {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
}

Execution execution_of(bool serial) { return serial ? Execution::Serial : Execution::Parallel; }

int report_outcome(const SimulateOutcome& out, const std::string& dir) {
    if (out.interrupted) {
        std::cout << out.message << "\n";
        return kExitPass;
    }
    std::cout << report_to_text(out.report);
    std::cout << "cross consistency " << (cross_consistency(out.report).pass ? "pass" : "fail") << "\n";
    std::cout << "wrote " << dir << "/report.json, report.txt, summary.csv\n";
    if (out.exit_code != kExitPass) std::cerr << "error: " << out.message << "\n";
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Leafwise Brownian motion and Lyapunov exponents of foliations of P^2"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // predict
    auto* predict = app.add_subcommand("predict", "Print the predicted exponent for degree d");
    int p_degree = 0;
    predict->add_option("--degree", p_degree, "Degree d >= 2")->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a path ensemble and write the report");
    std::string family = "jouanolou", foliation_file, config_file, out_dir = "folsim-out";
    int degree = 2;
    std::uint64_t foliation_seed = 1;
    RunConfig flags;
    std::string eta_mode = "calibrated";
    double beta = 1.0;
    bool trajectory = false, serial = false, stop_after = false;
    int threads = 0;
    double checkpoint_seconds = 60.0;
    sim->add_option("--family", family, "jouanolou or random")->check(CLI::IsMember({"jouanolou", "random"}));
    sim->add_option("--degree", degree, "Degree d >= 2");
    sim->add_option("--foliation-seed", foliation_seed, "Coefficient seed for --family random");
    sim->add_option("--foliation", foliation_file, "Foliation description file (JSON)");
    sim->add_option("--config", config_file, "Run configuration file (JSON)");
    sim->add_option("--paths", flags.n_paths, "Number of paths");
    sim->add_option("--t-max", flags.t_max, "Leaf time per path");
    sim->add_option("--dt", flags.dt, "Leaf time step");
    sim->add_option("--burn-in", flags.burn_in, "Leaf time discarded at the start");
    sim->add_option("--seed", flags.seed, "Random seed");
    sim->add_option("--eta-mode", eta_mode, "raw or calibrated")->check(CLI::IsMember({"raw", "calibrated"}));
    sim->add_option("--beta", beta, "Initial scale of the density estimate");
    sim->add_option("--kappa-interval", flags.kappa_interval, "Leaf time between curvature probes");
    sim->add_option("--switch-threshold", flags.switch_threshold, "Chart switching threshold");
    sim->add_option("--out", out_dir, "Output directory");
    sim->add_flag("--trajectory", trajectory, "Write trajectory.csv");
    sim->add_option("--threads", threads, "Worker threads (0: all)");
    sim->add_flag("--serial", serial, "Use the serial reference loop");
    sim->add_option("--checkpoint-interval", checkpoint_seconds)->group("");
    sim->add_flag("--stop-after-checkpoint", stop_after)->group("");

    // verify-local-model
    auto* verify = app.add_subcommand("verify-local-model", "Check the linear model invariants");
    std::string lambda_text = "i";
    int samples = 1000;
    std::uint64_t v_seed = 1;
    bool v_json = false;
    verify->add_option("--lambda", lambda_text, "Eigenvalue ratio a+bi, Im != 0");
    verify->add_option("--samples", samples, "Random samples per check");
    verify->add_option("--seed", v_seed, "Random seed");
    verify->add_flag("--json", v_json, "Machine-readable output");

    // selftest
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria at reduced scale");
    cli::SelftestArgs st;
    std::string scale = "quick";
    selftest->add_option("--scale", scale, "quick, ctest or full")
        ->check(CLI::IsMember({"quick", "ctest", "full"}));
    selftest->add_option("--criteria", st.criteria, "Criterion ids (0 is chart coherence)")
        ->delimiter(',');
    selftest->add_option("--work-dir", st.work_dir, "Scratch directory");
    selftest->add_option("--threads", st.threads, "Worker threads (0: all)");
    selftest->add_flag("--json", st.json, "Machine-readable output");
    selftest->add_flag("--inject-fault", st.inject_fault)->group("");

    // resume
    auto* res = app.add_subcommand("resume", "Continue a run from its checkpoint");
    ResumeOptions ro;
    bool r_serial = false;
    res->add_option("--checkpoint", ro.checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
    res->add_option("--threads", ro.threads, "Worker threads (0: all)");
    res->add_flag("--serial", r_serial, "Use the serial reference loop");
    res->add_option("--checkpoint-interval", ro.checkpoint_seconds)->group("");
    res->add_flag("--stop-after-checkpoint", ro.stop_after_checkpoint)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (*predict) {
            const ChiPrediction p = predict_chi(p_degree);
            std::cout << "chi = " << p.chi.str() << " (= -(d+2)/(d-1)), nor = O(" << p.nor_degree
                      << "), cotan = O(" << p.cotan_degree << ")\n";
            return kExitPass;
        }
        if (*sim) {
            SimulateOptions so;
            so.run.t_max = 200.0;
            json foliation;
            if (!config_file.empty()) apply_config_file(read_json_file(config_file), so.run, foliation);
            auto given = [&](const char* name) { return sim->count(name) > 0; };
            if (given("--paths")) so.run.n_paths = flags.n_paths;
            if (given("--t-max")) so.run.t_max = flags.t_max;
            if (given("--dt")) so.run.dt = flags.dt;
            if (given("--burn-in")) so.run.burn_in = flags.burn_in;
            if (given("--seed")) so.run.seed = flags.seed;
            if (given("--eta-mode")) so.run.eta_mode = parse_eta_mode(eta_mode);
            if (given("--beta")) so.run.eta.scale = beta;
            if (given("--kappa-interval")) so.run.kappa_interval = flags.kappa_interval;
            if (given("--switch-threshold")) so.run.switch_threshold = flags.switch_threshold;
            if (!foliation_file.empty()) foliation = read_json_file(foliation_file);
            if (given("--family") || given("--degree") || foliation.is_null()) {
                foliation = {{"family", family}, {"degree", degree}};
                if (family == "random") foliation["seed"] = foliation_seed;
            }
            if (foliation.value("degree", 0) < 2) throw UsageError("degree must be at least 2");
            so.foliation = foliation;
            so.out_dir = out_dir;
            so.trajectory = trajectory;
            so.execution = execution_of(serial);
            so.threads = threads;
            so.checkpoint_seconds = checkpoint_seconds;
            so.stop_after_checkpoint = stop_after;
            const FoliationSpec probe = foliation_from_json(foliation);
            so.run.spec = &probe;
            so.run.validate();
            so.run.spec = nullptr;
            return report_outcome(simulate(so), out_dir);
        }
        if (*verify) {
            const cd lambda = parse_complex(lambda_text);
            if (lambda.imag() == 0.0) throw UsageError("lambda must be non-real");
            const auto rows = verify_local_model(lambda, samples, v_seed);
            bool all = true;
            json j = json::array();
            for (const auto& r : rows) {
                all = all && r.pass();
                j.push_back({{"check", r.name},
                             {"max_residual", r.max_residual},
                             {"threshold", r.threshold},
                             {"samples", r.samples},
                             {"pass", r.pass()}});
            }
            if (v_json) {
                std::cout << json{{"lambda", {lambda.real(), lambda.imag()}}, {"checks", j}, {"all_pass", all}}.dump(2)
                          << "\n";
            } else {
                std::printf("%-18s %-14s %-10s %s\n", "check", "max residual", "threshold", "result");
                for (const auto& r : rows)
                    std::printf("%-18s %-14.6g %-10.3g %s\n", r.name.c_str(), r.max_residual,
                                r.threshold, r.pass() ? "pass" : "FAIL");
            }
            return all ? kExitPass : kExitCheckFailed;
        }
        if (*selftest) {
            st.scale = parse_scale(scale);
            return cli::run_selftest(st);
        }
        if (*res) {
            ro.execution = execution_of(r_serial);
            const SimulateOutcome out = resume(ro);
            return report_outcome(out, std::filesystem::path(ro.checkpoint).parent_path().string());
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
