#include "folsim/polynomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace folsim {

namespace {

// Powers z^0..z^n into out.
inline void powers(cd z, int n, cd* out) {
    out[0] = 1.0;
    for (int k = 1; k <= n; ++k) out[k] = out[k - 1] * z;
}

constexpr int kMaxDegree = 32;

}  // namespace

BivariatePoly::BivariatePoly(std::vector<Term> terms) : terms_(std::move(terms)) {
    canonicalize();
}

void BivariatePoly::add(int i, int j, cd c) {
    if (i < 0 || j < 0) throw std::invalid_argument("negative exponent");
    terms_.push_back({i, j, c});
    canonicalize();
}

void BivariatePoly::canonicalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    std::vector<Term> merged;
    for (const Term& t : terms_) {
        if (!merged.empty() && merged.back().i == t.i && merged.back().j == t.j)
            merged.back().c += t.c;
        else
            merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.c == cd(0.0); });
    terms_ = std::move(merged);
    degree_ = 0;
    for (const Term& t : terms_) degree_ = std::max(degree_, t.i + t.j);
    if (degree_ >= kMaxDegree) throw std::invalid_argument("polynomial degree too large");
}

cd BivariatePoly::operator()(cd u, cd v) const {
    cd up[kMaxDegree + 1], vp[kMaxDegree + 1];
    powers(u, degree_, up);
    powers(v, degree_, vp);
    cd s = 0.0;
    for (const Term& t : terms_) s += t.c * up[t.i] * vp[t.j];
    return s;
}

void BivariatePoly::eval(cd u, cd v, cd& value, cd& du, cd& dv) const {
    cd up[kMaxDegree + 1], vp[kMaxDegree + 1];
    powers(u, degree_, up);
    powers(v, degree_, vp);
    value = du = dv = 0.0;
    for (const Term& t : terms_) {
        value += t.c * up[t.i] * vp[t.j];
        if (t.i > 0) du += (t.c * double(t.i)) * up[t.i - 1] * vp[t.j];
        if (t.j > 0) dv += (t.c * double(t.j)) * up[t.i] * vp[t.j - 1];
    }
}

cd BivariatePoly::coeff(int i, int j) const {
    for (const Term& t : terms_)
        if (t.i == i && t.j == j) return t.c;
    return 0.0;
}

BivariatePoly BivariatePoly::homogeneous_part(int k) const {
    std::vector<Term> out;
    for (const Term& t : terms_)
        if (t.i + t.j == k) out.push_back(t);
    return BivariatePoly(std::move(out));
}

BivariatePoly BivariatePoly::truncated(int k) const {
    std::vector<Term> out;
    for (const Term& t : terms_)
        if (t.i + t.j <= k) out.push_back(t);
    return BivariatePoly(std::move(out));
}

void HomogeneousPoly::add(std::array<int, 3> e, cd c) {
    if (e[0] + e[1] + e[2] != degree_) throw std::invalid_argument("monomial degree mismatch");
    for (Term& t : terms_) {
        if (t.e == e) {
            t.c += c;
            std::erase_if(terms_, [](const Term& s) { return s.c == cd(0.0); });
            return;
        }
    }
    if (c != cd(0.0)) terms_.push_back({e, c});
}

cd HomogeneousPoly::operator()(const Vec3& x) const {
    cd s = 0.0;
    for (const Term& t : terms_) {
        cd m = t.c;
        for (int k = 0; k < 3; ++k)
            for (int p = 0; p < t.e[k]; ++p) m *= x[k];
        s += m;
    }
    return s;
}

}  // namespace folsim
