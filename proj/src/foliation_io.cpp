#include "folsim/foliation_io.hpp"

#include <fstream>
#include <stdexcept>

namespace folsim {

namespace {

BivariatePoly parse_monomials(const nlohmann::json& list) {
    BivariatePoly poly;
    for (const auto& m : list) {
        if (!m.is_array() || m.size() != 4)
            throw std::invalid_argument("monomial entries must be [i, j, re, im]");
        poly.add(m[0].get<int>(), m[1].get<int>(), cd(m[2].get<double>(), m[3].get<double>()));
    }
    return poly;
}

}  // namespace

FoliationSpec foliation_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("foliation document must be an object");
    const int degree = doc.at("degree").get<int>();
    const std::string family = doc.value("family", std::string("explicit"));
    if (family == "jouanolou") return jouanolou(degree);
    if (family == "random") return random_foliation(degree, doc.value("seed", std::uint64_t(1)));
    if (family != "explicit") throw std::invalid_argument("unknown foliation family: " + family);

    const int chart = doc.value("chart", 2);
    const auto& coeffs = doc.at("coefficients");
    const BivariatePoly p = parse_monomials(coeffs.at("P"));
    const BivariatePoly q = parse_monomials(coeffs.at("Q"));
    return make_foliation(PolyVectorField::from_chart(degree, chart, p, q), "explicit");
}

FoliationSpec load_foliation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open foliation file: " + path);
    return foliation_from_json(nlohmann::json::parse(in));
}

nlohmann::json describe_foliation(const FoliationSpec& spec) {
    nlohmann::json j;
    j["family"] = spec.family_tag;
    j["degree"] = spec.degree();
    j["singularity_count"] = spec.singularities.size();
    nlohmann::json sings = nlohmann::json::array();
    for (const auto& s : spec.singularities) {
        sings.push_back({{"chart", s.location.chart},
                         {"u", {s.location.q.x.real(), s.location.q.x.imag()}},
                         {"v", {s.location.q.y.real(), s.location.q.y.imag()}},
                         {"ratio", {s.ratio.real(), s.ratio.imag()}},
                         {"hyperbolic", s.hyperbolic},
                         {"box_radius", s.box_radius}});
    }
    j["singularities"] = sings;
    j["assumptions"] = spec.assumptions;
    return j;
}

}  // namespace folsim
