#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace henon {

using cx = std::complex<double>;

/// Magnitude above which any evaluated coordinate is reported as overflow.
inline constexpr double kOverflowCeiling = 1e150;

/// A point of C^2.
struct Point2 {
    cx x{};
    cx y{};

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(cx s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Max-norm on C^2.
inline double max_norm(const Point2& p) { return std::max(std::abs(p.x), std::abs(p.y)); }

/// Euclidean norm on C^2 = R^4.
inline double norm2(const Point2& p) { return std::sqrt(std::norm(p.x) + std::norm(p.y)); }

inline double distance(const Point2& a, const Point2& b) { return norm2(a - b); }

inline bool is_finite(const Point2& p)
{
    return std::isfinite(p.x.real()) && std::isfinite(p.x.imag()) && std::isfinite(p.y.real()) &&
           std::isfinite(p.y.imag());
}

/// Lexicographic order on (Re x, Im x, Re y, Im y).
inline bool lex_less(const Point2& a, const Point2& b)
{
    const std::array<double, 4> ka{a.x.real(), a.x.imag(), a.y.real(), a.y.imag()};
    const std::array<double, 4> kb{b.x.real(), b.x.imag(), b.y.real(), b.y.imag()};
    return ka < kb;
}

/// 2x2 complex matrix, row major.
struct Mat2 {
    cx a{}, b{}, c{}, d{};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    cx trace() const { return a + d; }
    cx det() const { return a * d - b * c; }
    double max_abs() const
    {
        return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
    }

    friend Mat2 operator*(const Mat2& m, const Mat2& n)
    {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c,
                m.c * n.b + m.d * n.d};
    }
    friend Point2 operator*(const Mat2& m, const Point2& v)
    {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend Mat2 operator*(cx s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace henon
