#pragma once

#include <string>

#include <json.hpp>

#include "folsim/foliation.hpp"

namespace folsim {

// Foliation description document. Accepted shapes:
//   {"family": "jouanolou", "degree": d}
//   {"family": "random", "degree": d, "seed": s}
//   {"degree": d, "chart": k, "coefficients": {"P": [[i, j, re, im], ...], "Q": [...]}}
FoliationSpec foliation_from_json(const nlohmann::json& doc);
FoliationSpec load_foliation(const std::string& path);

// Description of how a spec was built, echoed into reports.
nlohmann::json describe_foliation(const FoliationSpec& spec);

}  // namespace folsim
