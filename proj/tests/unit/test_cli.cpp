#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string("\"") + FOLSIM_CLI_PATH + "\" " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("folsim-cli-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const std::string kSmall = "--family jouanolou --degree 2 --paths 32 --t-max 3 --burn-in 1 --dt 2e-3 --seed 5";
// Long enough for more than one checkpoint round.
const std::string kRounds = "--family jouanolou --degree 2 --paths 32 --t-max 12 --burn-in 1 --dt 4e-3 --seed 5";

}  // namespace

TEST_CASE("predict") {
    Run r = cli("predict --degree 2");
    CHECK(r.code == 0);
    CHECK(r.out.find("chi = -4") != std::string::npos);
    CHECK(r.out.find("O(4)") != std::string::npos);
    r = cli("predict --degree 3");
    CHECK(r.code == 0);
    CHECK(r.out.find("-5/2") != std::string::npos);
    CHECK(cli("predict --degree 1").code == 2);
    CHECK(cli("predict --degree 2 --bogus").code == 2);
    CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("verify-local-model") {
    CHECK(cli("verify-local-model --lambda i --samples 200").code == 0);
    const Run a = cli("verify-local-model --lambda 1+i --samples 100 --json");
    REQUIRE(a.code == 0);
    const json j = json::parse(a.out);
    CHECK(j.contains("checks"));
    CHECK(j["all_pass"] == true);
    CHECK(cli("verify-local-model --lambda 2 --samples 10").code == 2);
    // Conjugate orientation: 1/(1+i) = 0.5-0.5i reduces to the same model.
    const Run b = cli("verify-local-model --lambda 0.5-0.5i --samples 100 --json");
    REQUIRE(b.code == 0);
    CHECK(json::parse(b.out)["checks"] == j["checks"]);
}

TEST_CASE("simulate writes a report") {
    const fs::path dir = scratch("sim");
    const Run r = cli("simulate " + kSmall + " --trajectory --out " + dir.string());
    REQUIRE(r.code == 0);
    const json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["format"] == "folsim-report");
    CHECK(rep["complete"] == true);
    for (const char* key : {"chi_cocycle", "chi_kappa", "fs_mass", "raw", "beta_fit", "residual_mass_identity",
                            "residual_cross", "predicted_chi", "ergodicity", "integrability", "diagnostics"})
        CHECK_MESSAGE(rep.contains(key), key);
    CHECK(rep["predicted_chi"]["rational"] == "-4");
    CHECK(rep["config"]["n_paths"] == 32);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "report.txt"));
    CHECK(fs::file_size(dir / "trajectory.csv") > 0);
    CHECK_FALSE(fs::exists(dir / "checkpoint.json"));

    // Same seed, same bytes; thread count does not matter.
    const fs::path again = scratch("sim-again");
    REQUIRE(cli("simulate " + kSmall + " --serial --out " + again.string()).code == 0);
    CHECK(slurp(dir / "summary.csv") == slurp(again / "summary.csv"));
}

TEST_CASE("resume continues a stopped run") {
    const fs::path whole = scratch("whole"), part = scratch("part");
    REQUIRE(cli("simulate " + kRounds + " --out " + whole.string()).code == 0);
    const Run stop = cli("simulate " + kRounds + " --checkpoint-interval 0 --stop-after-checkpoint --out " +
                         part.string());
    CHECK(stop.code == 0);
    REQUIRE(fs::exists(part / "checkpoint.json"));
    CHECK(json::parse(slurp(part / "report.json"))["complete"] == false);
    REQUIRE(cli("resume --checkpoint " + (part / "checkpoint.json").string()).code == 0);
    CHECK(slurp(whole / "summary.csv") == slurp(part / "summary.csv"));
    CHECK(cli("resume --checkpoint " + (part / "missing.json").string()).code == 2);
}

TEST_CASE("config files") {
    const fs::path dir = scratch("cfg");
    {
        std::ofstream(dir / "run.json") << R"({"n_paths": 32, "t_max": 3, "burn_in": 1, "dt": 0.002, "seed": 9})";
        std::ofstream(dir / "bad.json") << R"({"n_paths": 32, "colour": "blue"})";
    }
    // Flags override the file.
    const fs::path out = dir / "out";
    REQUIRE(cli("simulate --family jouanolou --degree 2 --config " + (dir / "run.json").string() +
                " --seed 5 --out " + out.string())
                .code == 0);
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["config"]["seed"] == 5);
    CHECK(rep["config"]["n_paths"] == 32);
    CHECK(cli("simulate --family jouanolou --degree 2 --config " + (dir / "bad.json").string() + " --out " +
              out.string())
              .code == 2);
    CHECK(cli("simulate --family jouanolou --degree 2 --paths 32 --t-max 2 --burn-in 2 --out " + out.string())
              .code == 2);
}

TEST_CASE("selftest") {
    const Run r = cli("selftest --criteria 0 --json");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["format"] == "folsim-selftest");
    CHECK(j["all_pass"] == true);
    REQUIRE(j["criteria"].size() == 1);
    CHECK(j["criteria"][0]["id"] == 0);
    CHECK(j["criteria"][0]["pass"] == true);
    CHECK(cli("selftest --criteria 0 --inject-fault").code == 1);
    const Run lines = cli("selftest --criteria 0,1");
    CHECK(lines.code == 0);
    CHECK(lines.out.find("PASS  criterion 1") != std::string::npos);
}
