#include "selftest.hpp"

#include <iostream>

#include "folsim/simulate.hpp"

namespace folsim::cli {

int run_selftest(const SelftestArgs& args) {
    SuiteOptions opt;
    opt.scale = args.scale;
    opt.work_dir = args.work_dir;
    opt.threads = args.threads;
    opt.inject_fault = args.inject_fault;
    opt.log = [](const std::string& s) { std::cerr << "[selftest] " << s << "\n"; };
    AcceptanceSuite suite(opt);
    const auto& ids = args.criteria.empty() ? AcceptanceSuite::all_ids() : args.criteria;

    std::vector<CriterionResult> results;
    bool all = true;
    for (int id : ids) {
        results.push_back(suite.run(id));
        all = all && results.back().pass;
        if (!args.json) std::cout << result_line(results.back()) << std::endl;
    }
    if (args.json) std::cout << results_to_json(results, args.scale).dump(2) << "\n";
    else std::cout << (all ? "all criteria passed" : "some criteria failed") << "\n";
    return all ? kExitPass : kExitCheckFailed;
}

}  // namespace folsim::cli
