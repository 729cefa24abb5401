#include "folsim/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace folsim {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

// JSON has no infinities; unbounded interval ends become null.
nlohmann::json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

nlohmann::json interval_json(const Interval& i) {
    return {{"estimate", number(i.estimate)},
            {"ci_lo", number(i.lo)},
            {"ci_hi", number(i.hi)},
            {"batches", i.batches}};
}

nlohmann::json report_to_json(const EstimatorReport& r, const nlohmann::json& effective) {
    nlohmann::json j;
    j["format"] = "folsim-report";
    j["version"] = 1;
    j["complete"] = r.complete;
    j["config"] = effective;
    j["chi_cocycle"] = interval_json(r.chi_cocycle);
    j["chi_kappa"] = interval_json(r.chi_kappa);
    j["fs_mass"] = interval_json(r.mass);
    j["raw"] = {{"chi_cocycle", interval_json(r.chi_cocycle_raw)},
                {"chi_kappa", interval_json(r.chi_kappa_raw)},
                {"fs_mass", interval_json(r.mass_raw)}};
    j["beta_fit"] = number(r.beta_fit);
    j["residual_mass_identity"] = number(r.residual_mass);
    j["residual_cross"] = number(r.residual_cross);
    j["predicted_chi"] = {{"rational", r.predicted.chi.str()},
                          {"value", r.predicted.chi.value()},
                          {"nor_degree", r.predicted.nor_degree},
                          {"cotan_degree", r.predicted.cotan_degree}};
    j["ergodicity"] = {{"chi_start_a", interval_json(r.chi_by_start[0])},
                       {"chi_start_b", interval_json(r.chi_by_start[1])},
                       {"gap_in_half_widths", number(r.ergodicity_z)}};
    j["integrability"] = {{"W_half", number(r.w_half)},
                          {"W_full", number(r.w_full)},
                          {"logstar_dist_half", number(r.logdist_half)},
                          {"logstar_dist_full", number(r.logdist_full)}};
    j["diagnostics"] = {{"guard_trips", r.guard_trips},
                        {"aborted_paths", r.aborted},
                        {"box_entries", r.box_entries},
                        {"halvings", r.halvings},
                        {"kappa_failures", r.kappa_failures},
                        {"box_time_fraction", number(r.box_fraction)},
                        {"holonomy_rate_constant", number(r.f1_constant)},
                        {"eta_trust_histogram",
                         {{"below_0.5", r.trust_hist[0]},
                          {"0.5_to_0.9", r.trust_hist[1]},
                          {"0.9_to_0.95", r.trust_hist[2]},
                          {"above_0.95", r.trust_hist[3]}}}};
    return j;
}

std::string report_to_text(const EstimatorReport& r) {
    std::ostringstream os;
    auto iv = [](const Interval& i) {
        return format_number(i.estimate) + "  [" + format_number(i.lo) + ", " +
               format_number(i.hi) + "]";
    };
    os << "foliation        " << r.family << " d=" << r.degree << "\n";
    os << "run              paths=" << r.n_paths << " t_max=" << format_number(r.t_max)
       << " dt=" << format_number(r.dt) << " burn_in=" << format_number(r.burn_in)
       << " seed=" << r.seed << " eta_mode=" << to_string(r.eta_mode) << "\n";
    if (!r.complete) os << "status           INCOMPLETE\n";
    os << "chi (cocycle)    " << iv(r.chi_cocycle) << "\n";
    os << "chi (kappa)      " << iv(r.chi_kappa) << "\n";
    os << "fs mass          " << iv(r.mass) << "\n";
    os << "raw chi cocycle  " << iv(r.chi_cocycle_raw) << "\n";
    os << "raw chi kappa    " << iv(r.chi_kappa_raw) << "\n";
    os << "raw fs mass      " << iv(r.mass_raw) << "\n";
    os << "beta fit         " << format_number(r.beta_fit) << "\n";
    os << "residual mass    " << format_number(r.residual_mass) << "\n";
    os << "residual cross   " << format_number(r.residual_cross) << "\n";
    os << "predicted chi    " << r.predicted.chi.str() << "\n";
    os << "start A / B      " << iv(r.chi_by_start[0]) << " / " << iv(r.chi_by_start[1]) << "\n";
    os << "W  half / full   " << format_number(r.w_half) << " / " << format_number(r.w_full)
       << "\n";
    os << "log*dist h / f   " << format_number(r.logdist_half) << " / "
       << format_number(r.logdist_full) << "\n";
    os << "box time         " << format_number(r.box_fraction) << "\n";
    os << "guard trips      " << r.guard_trips << "\n";
    os << "aborted paths    " << r.aborted << "\n";
    return os.str();
}

std::string csv_header() {
    return "family,d,n_paths,t_max,dt,seed,chi_cocycle,ci_lo,ci_hi,chi_kappa,ci_lo,ci_hi,"
           "m_hat,beta_fit,residual_mass,residual_cross,predicted_chi\n";
}

std::string csv_row(const EstimatorReport& r) {
    std::ostringstream os;
    os << csv_field(r.family) << ',' << r.degree << ',' << r.n_paths << ','
       << format_number(r.t_max) << ',' << format_number(r.dt) << ',' << r.seed << ','
       << format_number(r.chi_cocycle.estimate) << ',' << format_number(r.chi_cocycle.lo) << ','
       << format_number(r.chi_cocycle.hi) << ',' << format_number(r.chi_kappa.estimate) << ','
       << format_number(r.chi_kappa.lo) << ',' << format_number(r.chi_kappa.hi) << ','
       << format_number(r.mass.estimate) << ',' << format_number(r.beta_fit) << ','
       << format_number(r.residual_mass) << ',' << format_number(r.residual_cross) << ','
       << r.predicted.chi.str() << '\n';
    return os.str();
}

}  // namespace folsim
