#pragma once

#include <array>
#include <vector>

#include "folsim/complex2.hpp"

namespace folsim {

// Sparse bivariate polynomial sum c_ij u^i v^j.
class BivariatePoly {
public:
    struct Term {
        int i = 0, j = 0;
        cd c{};
    };

    BivariatePoly() = default;
    explicit BivariatePoly(std::vector<Term> terms);

    void add(int i, int j, cd c);
    const std::vector<Term>& terms() const { return terms_; }
    int degree() const { return degree_; }

    cd operator()(cd u, cd v) const;
    // Value and both partials in one pass.
    void eval(cd u, cd v, cd& value, cd& du, cd& dv) const;

    // Coefficient of u^i v^j (zero if absent).
    cd coeff(int i, int j) const;
    // Part of exact total degree k.
    BivariatePoly homogeneous_part(int k) const;
    // Part of total degree at most k.
    BivariatePoly truncated(int k) const;

private:
    void canonicalize();

    std::vector<Term> terms_;
    int degree_ = 0;
};

// Sparse homogeneous polynomial in (X0, X1, X2).
class HomogeneousPoly {
public:
    struct Term {
        std::array<int, 3> e{};
        cd c{};
    };

    HomogeneousPoly() = default;
    explicit HomogeneousPoly(int degree) : degree_(degree) {}

    void add(std::array<int, 3> e, cd c);
    const std::vector<Term>& terms() const { return terms_; }
    int degree() const { return degree_; }
    bool is_zero() const { return terms_.empty(); }

    cd operator()(const Vec3& x) const;

private:
    std::vector<Term> terms_;
    int degree_ = 0;
};

}  // namespace folsim
