#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "folsim/foliation.hpp"
#include "folsim/local_model.hpp"

namespace folsim {

// ---------------------------------------------------------------------------
// Chart coherence: the chart fields of one foliation must agree on overlaps up to
// the factor X_k^{-(d-1)}. Relative residual of the pushed-forward field.
struct CoherenceResult {
    double max_residual = 0.0;
    int points = 0;
    double threshold = 1e-9;
    bool pass() const { return max_residual <= threshold; }
};
CoherenceResult chart_coherence(const PolyVectorField& field, int points, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Local-model invariant table.
struct ModelCheckRow {
    std::string name;
    double max_residual = 0.0;
    double threshold = 0.0;
    int samples = 0;
    bool pass() const { return max_residual <= threshold; }
};

// Lambda with Im < 0 is replaced by 1/lambda with the coordinates swapped; a real
// lambda throws std::invalid_argument.
std::vector<ModelCheckRow> verify_local_model(cd lambda, int samples, std::uint64_t seed);

// Log holonomy of the linear model written out directly (no LocalModel involved).
double log_phi_closed_form(cd lambda, cd z, cd w, cd zeta);

// ---------------------------------------------------------------------------
// Acceptance criteria 1 to 10 plus the chart-coherence self check (id 0).
enum class Scale { Quick, CTest, Full };
const char* to_string(Scale s);
Scale parse_scale(const std::string& s);

struct SuiteOptions {
    Scale scale = Scale::CTest;
    std::string work_dir;            // scratch space for the determinism runs
    int threads = 0;
    bool inject_fault = false;       // corrupt one chart coefficient before checking
    std::function<void(const std::string&)> log;  // progress lines, may be empty
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    nlohmann::json values = nlohmann::json::object();
};

class AcceptanceSuite {
public:
    explicit AcceptanceSuite(SuiteOptions opt);
    ~AcceptanceSuite();

    CriterionResult run(int id);
    std::vector<CriterionResult> run_all(const std::vector<int>& ids);

    static const std::vector<int>& all_ids();

private:
    struct Runs;
    SuiteOptions opt_;
    std::unique_ptr<Runs> runs_;
};

nlohmann::json results_to_json(const std::vector<CriterionResult>& results, Scale scale);
std::string result_line(const CriterionResult& r);

}  // namespace folsim
