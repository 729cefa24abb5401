#pragma once

#include <string>

#include <json.hpp>

#include "folsim/estimators.hpp"

namespace folsim {

nlohmann::json interval_json(const Interval& i);

// Machine-readable report; `effective` echoes the configuration that produced it.
nlohmann::json report_to_json(const EstimatorReport& r, const nlohmann::json& effective);

std::string report_to_text(const EstimatorReport& r);

// family,d,n_paths,t_max,dt,seed,chi_cocycle,ci_lo,ci_hi,chi_kappa,ci_lo,ci_hi,
// m_hat,beta_fit,residual_mass,residual_cross,predicted_chi
std::string csv_header();
std::string csv_row(const EstimatorReport& r);

// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite values).
std::string format_number(double v);

}  // namespace folsim
