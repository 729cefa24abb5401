#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace folsim {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Squared modulus without the hypot overhead of std::norm on some libstdc++ builds.
inline double abs2(cd z) { return z.real() * z.real() + z.imag() * z.imag(); }

struct Vec2 {
    cd x{}, y{};

    constexpr cd& operator[](int i) { return i == 0 ? x : y; }
    constexpr const cd& operator[](int i) const { return i == 0 ? x : y; }

    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(cd s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(cd s, Vec2 a) { return a *= s; }
inline Vec2 operator*(double s, Vec2 a) { return a *= cd(s); }

inline double norm2(const Vec2& v) { return abs2(v.x) + abs2(v.y); }
inline double norm(const Vec2& v) { return std::sqrt(norm2(v)); }
inline double max_abs(const Vec2& v) { return std::max(std::abs(v.x), std::abs(v.y)); }

// Row-major 2x2 complex matrix.
struct Mat2 {
    cd a{}, b{}, c{}, d{};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(cd p, cd q) { return {p, 0.0, 0.0, q}; }

    Mat2& operator+=(const Mat2& o) { a += o.a; b += o.b; c += o.c; d += o.d; return *this; }
    Mat2& operator-=(const Mat2& o) { a -= o.a; b -= o.b; c -= o.c; d -= o.d; return *this; }
    Mat2& operator*=(cd s) { a *= s; b *= s; c *= s; d *= s; return *this; }
};

inline Mat2 operator+(Mat2 m, const Mat2& o) { return m += o; }
inline Mat2 operator-(Mat2 m, const Mat2& o) { return m -= o; }
inline Mat2 operator*(cd s, Mat2 m) { return m *= s; }

inline Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
            m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

// Outer product u v^T.
inline Mat2 outer(const Vec2& u, const Vec2& v) {
    return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
}

inline cd det(const Mat2& m) { return m.a * m.d - m.b * m.c; }
inline cd trace(const Mat2& m) { return m.a + m.d; }

inline Mat2 inverse(const Mat2& m) {
    const cd inv = 1.0 / det(m);
    return {m.d * inv, -m.b * inv, -m.c * inv, m.a * inv};
}

inline double frobenius(const Mat2& m) {
    return std::sqrt(abs2(m.a) + abs2(m.b) + abs2(m.c) + abs2(m.d));
}

// Roots of t^2 - tr t + det; ordering is left to the caller.
inline std::array<cd, 2> eigenvalues(const Mat2& m) {
    const cd tr = trace(m);
    const cd disc = std::sqrt(tr * tr - 4.0 * det(m));
    // Cancellation-free pair.
    const cd q = (std::real(std::conj(tr) * disc) >= 0.0) ? 0.5 * (tr + disc) : 0.5 * (tr - disc);
    if (std::abs(q) == 0.0) return {cd(0.0), cd(0.0)};
    return {q, det(m) / q};
}

// Unit eigenvector for eigenvalue ev.
inline Vec2 eigenvector(const Mat2& m, cd ev) {
    const Vec2 r1{m.b, ev - m.a};
    const Vec2 r2{ev - m.d, m.c};
    const Vec2 v = norm2(r1) >= norm2(r2) ? r1 : r2;
    const double n = norm(v);
    if (n == 0.0) return {1.0, 0.0};
    return (1.0 / n) * v;
}

using Vec3 = std::array<cd, 3>;

inline double norm2(const Vec3& v) { return abs2(v[0]) + abs2(v[1]) + abs2(v[2]); }

// Hermitian product sum a_i conj(b_i).
inline cd hdot(const Vec3& a, const Vec3& b) {
    return a[0] * std::conj(b[0]) + a[1] * std::conj(b[1]) + a[2] * std::conj(b[2]);
}

}  // namespace folsim
