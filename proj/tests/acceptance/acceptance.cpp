// Acceptance criteria 1 to 10, one PASS/FAIL line each.
//
// Exit status: 0 once every criterion has been evaluated, whatever the verdicts;
// with --strict, 1 if any criterion failed. 2 on usage errors, 3 if a criterion
// could not be evaluated at all.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "folsim/checks.hpp"

int main(int argc, char** argv) {
    CLI::App app{"folsim acceptance suite"};
    std::string scale = "ctest";
    std::vector<int> ids;
    std::string out = "acceptance_results";
    int threads = 0;
    bool strict = false, coherence = false;
    app.add_option("--scale", scale, "quick, ctest or full")->check(CLI::IsMember({"quick", "ctest", "full"}));
    app.add_option("--criteria", ids, "Subset of criterion ids")->delimiter(',');
    app.add_option("--out", out, "Results prefix (.txt and .json are appended)");
    app.add_option("--threads", threads, "Worker threads (0: all)");
    app.add_flag("--strict", strict, "Exit 1 if any criterion fails");
    app.add_flag("--with-coherence", coherence, "Also run the chart-coherence check (id 0)");
    CLI11_PARSE(app, argc, argv);

    if (ids.empty()) {
        if (coherence) ids.push_back(0);
        for (int id = 1; id <= 10; ++id) ids.push_back(id);
    }

    folsim::SuiteOptions opt;
    opt.scale = folsim::parse_scale(scale);
    opt.threads = threads;
    opt.work_dir = (std::filesystem::temp_directory_path() / "folsim-acceptance").string();
    opt.log = [](const std::string& s) { std::cerr << "  .. " << s << std::endl; };
    folsim::AcceptanceSuite suite(opt);

    std::cout << "acceptance suite, scale " << scale << std::endl;
    std::vector<folsim::CriterionResult> results;
    int failed = 0;
    try {
        for (int id : ids) {
            results.push_back(suite.run(id));
            failed += results.back().pass ? 0 : 1;
            std::cout << folsim::result_line(results.back()) << std::endl;
        }
    } catch (const std::exception& e) {
        std::cout << "ERROR  criterion " << (results.size() < ids.size() ? ids[results.size()] : -1)
                  << " could not be evaluated: " << e.what() << std::endl;
        return 3;
    }
    std::cout << ids.size() - std::size_t(failed) << " of " << ids.size() << " criteria passed" << std::endl;

    std::ofstream txt(out + ".txt");
    for (const auto& r : results) txt << folsim::result_line(r) << "\n";
    std::ofstream(out + ".json") << folsim::results_to_json(results, opt.scale).dump(2) << "\n";
    return strict && failed > 0 ? 1 : 0;
}
