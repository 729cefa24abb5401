#include "folsim/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace folsim {

using nlohmann::json;

std::string hex_double(double v) {
    static constexpr char digits[] = "0123456789abcdef";
    const auto bits = std::bit_cast<std::uint64_t>(v);
    std::string out(16, '0');
    for (int i = 0; i < 8; ++i) {
        const unsigned byte = unsigned(bits >> (8 * i)) & 0xffu;
        out[std::size_t(2 * i)] = digits[byte >> 4];
        out[std::size_t(2 * i + 1)] = digits[byte & 0xf];
    }
    return out;
}

double parse_hex_double(const std::string& s) {
    if (s.size() != 16) throw std::invalid_argument("hex double must have 16 digits: " + s);
    auto nibble = [&](char c) -> unsigned {
        if (c >= '0' && c <= '9') return unsigned(c - '0');
        if (c >= 'a' && c <= 'f') return unsigned(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return unsigned(c - 'A' + 10);
        throw std::invalid_argument("bad hex digit in " + s);
    };
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        const std::uint64_t byte =
            (nibble(s[std::size_t(2 * i)]) << 4) | nibble(s[std::size_t(2 * i + 1)]);
        bits |= byte << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

namespace {

json hx(double v) { return hex_double(v); }
double rd(const json& j) { return parse_hex_double(j.get<std::string>()); }

json cx(cd z) { return json::array({hx(z.real()), hx(z.imag())}); }
cd rcx(const json& j) { return {rd(j.at(0)), rd(j.at(1))}; }

json vec2(const Vec2& v) { return json::array({cx(v.x), cx(v.y)}); }
Vec2 rvec2(const json& j) { return {rcx(j.at(0)), rcx(j.at(1))}; }

json point(const ChartPoint& p) { return {{"chart", p.chart}, {"q", vec2(p.q)}}; }
ChartPoint rpoint(const json& j) { return {j.at("chart").get<int>(), rvec2(j.at("q"))}; }

json eta_config(const EtaConfig& c) {
    return {{"rays", c.rays},
            {"rel_precision", hx(c.rel_precision)},
            {"ray_tol", hx(c.ray_tol)},
            {"forbidden_fraction", hx(c.forbidden_fraction)},
            {"max_radius", hx(c.max_radius)},
            {"min_radius", hx(c.min_radius)},
            {"brody_cap", hx(c.brody_cap)},
            {"scale", hx(c.scale)},
            {"all_time_charts", c.all_time_charts},
            {"refresh_distance", hx(c.refresh_distance)},
            {"boundary_samples", c.boundary_samples}};
}

EtaConfig reta_config(const json& j) {
    EtaConfig c;
    c.rays = j.at("rays").get<int>();
    c.rel_precision = rd(j.at("rel_precision"));
    c.ray_tol = rd(j.at("ray_tol"));
    c.forbidden_fraction = rd(j.at("forbidden_fraction"));
    c.max_radius = rd(j.at("max_radius"));
    c.min_radius = rd(j.at("min_radius"));
    c.brody_cap = rd(j.at("brody_cap"));
    c.scale = rd(j.at("scale"));
    c.all_time_charts = j.at("all_time_charts").get<bool>();
    c.refresh_distance = rd(j.at("refresh_distance"));
    c.boundary_samples = j.at("boundary_samples").get<int>();
    return c;
}

}  // namespace

json config_to_json(const RunConfig& c) {
    return {{"n_paths", c.n_paths},
            {"t_max", hx(c.t_max)},
            {"dt", hx(c.dt)},
            {"burn_in", hx(c.burn_in)},
            {"seed", c.seed},
            {"eta_mode", to_string(c.eta_mode)},
            {"start_mode", to_string(c.start_mode)},
            {"fixed_start", point(c.fixed_start)},
            {"kappa_interval", hx(c.kappa_interval)},
            {"kappa_channel", c.kappa_channel},
            {"switch_threshold", hx(c.switch_threshold)},
            {"eta", eta_config(c.eta)},
            {"step_tol", hx(c.step_tol)},
            {"model_world", c.model_world},
            {"model_lambda", cx(c.model_lambda)},
            {"abort_tolerance", hx(c.abort_tolerance)}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.n_paths = j.at("n_paths").get<std::int64_t>();
    c.t_max = rd(j.at("t_max"));
    c.dt = rd(j.at("dt"));
    c.burn_in = rd(j.at("burn_in"));
    c.seed = j.at("seed").get<std::uint64_t>();
    c.eta_mode = parse_eta_mode(j.at("eta_mode").get<std::string>());
    c.start_mode = j.at("start_mode").get<std::string>() == "fixed" ? StartMode::Fixed
                                                                     : StartMode::Random;
    c.fixed_start = rpoint(j.at("fixed_start"));
    c.kappa_interval = rd(j.at("kappa_interval"));
    c.kappa_channel = j.at("kappa_channel").get<bool>();
    c.switch_threshold = rd(j.at("switch_threshold"));
    c.eta = reta_config(j.at("eta"));
    c.step_tol = rd(j.at("step_tol"));
    c.model_world = j.at("model_world").get<bool>();
    c.model_lambda = rcx(j.at("model_lambda"));
    c.abort_tolerance = rd(j.at("abort_tolerance"));
    return c;
}

json path_state_to_json(const PathState& st) {
    const LeafWalkerState& w = st.walker;
    json walker = {
        {"point", point(w.point)},
        {"steps", w.steps},
        {"log_holonomy", hx(w.log_holonomy)},
        {"normal", vec2(w.normal_unit)},
        {"tangent", vec2(w.tangent_unit)},
        {"zeta_accum", cx(w.zeta_accum)},
        {"rng", {{"seed", w.rng.seed()}, {"stream", w.rng.stream_id()}, {"block", w.rng.block()}}},
        {"eta_cache",
         {{"valid", w.eta_cache.valid},
          {"value", hx(w.eta_cache.value)},
          {"radius", hx(w.eta_cache.radius)},
          {"trust", hx(w.eta_cache.trust)},
          {"anchor", json::array({cx(w.eta_cache.anchor[0]), cx(w.eta_cache.anchor[1]),
                                  cx(w.eta_cache.anchor[2])})},
          {"method", w.eta_cache.method}}},
        {"eta", hx(w.eta)},
        {"flags",
         {{"box_steps", w.flags.box_steps},
          {"box_entries", w.flags.box_entries},
          {"halvings", w.flags.halvings},
          {"eta_searches", w.flags.eta_searches},
          {"guard_trips", w.flags.guard_trips},
          {"in_box", w.flags.in_box}}},
        {"visit",
         {{"box", w.visit.box},
          {"entry_norm", hx(w.visit.entry_norm)},
          {"zeta", cx(w.visit.zeta)},
          {"entry_step", w.visit.entry_step},
          {"tripped", w.visit.tripped}}},
        {"aborted", w.aborted},
        {"abort_reason", w.abort_reason}};
    json hist = json::array();
    for (auto h : st.trust_hist) hist.push_back(h);
    return {{"walker", walker},
            {"start_group", st.start_group},
            {"logh_burn", hx(st.logh_burn)},
            {"eta2_sum", hx(st.eta2_sum)},
            {"w_half", hx(st.w_half)},
            {"w_full", hx(st.w_full)},
            {"ld_half", hx(st.ld_half)},
            {"ld_full", hx(st.ld_full)},
            {"box_steps", hx(st.box_steps)},
            {"kappa_sum", hx(st.kappa_sum)},
            {"kappa_samples", st.kappa_samples},
            {"kappa_failures", st.kappa_failures},
            {"window_logh", hx(st.window_logh)},
            {"window_ld", hx(st.window_ld)},
            {"window_n", st.window_n},
            {"f1_max", hx(st.f1_max)},
            {"trust_hist", hist},
            {"done", st.done}};
}

PathState path_state_from_json(const json& j) {
    PathState st;
    const json& w = j.at("walker");
    LeafWalkerState& s = st.walker;
    s.point = rpoint(w.at("point"));
    s.steps = w.at("steps").get<std::int64_t>();
    s.log_holonomy = rd(w.at("log_holonomy"));
    s.normal_unit = rvec2(w.at("normal"));
    s.tangent_unit = rvec2(w.at("tangent"));
    s.zeta_accum = rcx(w.at("zeta_accum"));
    const json& rng = w.at("rng");
    s.rng = RngStream(rng.at("seed").get<std::uint64_t>(), rng.at("stream").get<std::uint64_t>(),
                      rng.at("block").get<std::uint64_t>());
    const json& ec = w.at("eta_cache");
    s.eta_cache.valid = ec.at("valid").get<bool>();
    s.eta_cache.value = rd(ec.at("value"));
    s.eta_cache.radius = rd(ec.at("radius"));
    s.eta_cache.trust = rd(ec.at("trust"));
    for (std::size_t k = 0; k < 3; ++k) s.eta_cache.anchor[k] = rcx(ec.at("anchor").at(k));
    s.eta_cache.method = ec.at("method").get<int>();
    s.eta = rd(w.at("eta"));
    const json& f = w.at("flags");
    s.flags.box_steps = f.at("box_steps").get<std::int64_t>();
    s.flags.box_entries = f.at("box_entries").get<std::int64_t>();
    s.flags.halvings = f.at("halvings").get<std::int64_t>();
    s.flags.eta_searches = f.at("eta_searches").get<std::int64_t>();
    s.flags.guard_trips = f.at("guard_trips").get<std::int64_t>();
    s.flags.in_box = f.at("in_box").get<bool>();
    const json& v = w.at("visit");
    s.visit.box = v.at("box").get<int>();
    s.visit.entry_norm = rd(v.at("entry_norm"));
    s.visit.zeta = rcx(v.at("zeta"));
    s.visit.entry_step = v.at("entry_step").get<std::int64_t>();
    s.visit.tripped = v.at("tripped").get<bool>();
    s.aborted = w.at("aborted").get<bool>();
    s.abort_reason = w.at("abort_reason").get<std::string>();

    st.start_group = j.at("start_group").get<int>();
    st.logh_burn = rd(j.at("logh_burn"));
    st.eta2_sum = rd(j.at("eta2_sum"));
    st.w_half = rd(j.at("w_half"));
    st.w_full = rd(j.at("w_full"));
    st.ld_half = rd(j.at("ld_half"));
    st.ld_full = rd(j.at("ld_full"));
    st.box_steps = rd(j.at("box_steps"));
    st.kappa_sum = rd(j.at("kappa_sum"));
    st.kappa_samples = j.at("kappa_samples").get<std::int64_t>();
    st.kappa_failures = j.at("kappa_failures").get<std::int64_t>();
    st.window_logh = rd(j.at("window_logh"));
    st.window_ld = rd(j.at("window_ld"));
    st.window_n = j.at("window_n").get<std::int64_t>();
    st.f1_max = rd(j.at("f1_max"));
    for (std::size_t k = 0; k < 4; ++k) st.trust_hist[k] = j.at("trust_hist").at(k).get<std::int64_t>();
    st.done = j.at("done").get<bool>();
    return st;
}

json checkpoint_to_json(const Checkpoint& c) {
    json paths = json::array();
    for (const PathState& p : c.state.paths) paths.push_back(path_state_to_json(p));
    return {{"format", "folsim-checkpoint"},
            {"version", kCheckpointVersion},
            {"byte_order", "little-endian"},
            {"foliation", c.foliation},
            {"config", config_to_json(c.config)},
            {"extra", c.extra},
            {"step", c.state.step},
            {"paths", paths}};
}

Checkpoint checkpoint_from_json(const json& j) {
    if (j.value("format", std::string()) != "folsim-checkpoint")
        throw std::invalid_argument("not a checkpoint document");
    if (j.at("version").get<int>() != kCheckpointVersion)
        throw std::invalid_argument("unsupported checkpoint version");
    if (j.at("byte_order").get<std::string>() != "little-endian")
        throw std::invalid_argument("unsupported checkpoint byte order");
    Checkpoint c;
    c.foliation = j.at("foliation");
    c.config = config_from_json(j.at("config"));
    c.extra = j.value("extra", json::object());
    c.state.step = j.at("step").get<std::int64_t>();
    for (const json& p : j.at("paths")) c.state.paths.push_back(path_state_from_json(p));
    if (c.state.paths.size() != std::size_t(c.config.n_paths))
        throw std::invalid_argument("checkpoint path count does not match its configuration");
    return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
        out << checkpoint_to_json(c).dump(1) << '\n';
        if (!out) throw std::runtime_error("failed writing checkpoint " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open checkpoint " + path);
    return checkpoint_from_json(json::parse(in));
}

}  // namespace folsim
