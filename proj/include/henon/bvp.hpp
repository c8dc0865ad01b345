#pragma once

#include <span>
#include <vector>

#include "henon/map.hpp"

namespace henon {

/// Complex affine line gamma(t) = base + t dir, also alpha x + beta y = c.
struct AffineLine {
    Point2 base;
    Point2 dir;
    cx alpha{}, beta{}, c{};

    static AffineLine through(const Point2& base, const Point2& dir);

    Point2 at(cx t) const { return base + t * dir; }
    /// alpha x + beta y - c, with (alpha, beta) of unit norm.
    cx defect(const Point2& z) const { return alpha * z.x + beta * z.y - c; }
    /// Parameter of the orthogonal projection of z onto the line.
    cx project(const Point2& z) const;
};

/// Principal angle of the direction to the nearer coordinate axis must exceed this.
inline constexpr double kAxisMargin = 0.05;

bool is_generic(const AffineLine& line);

/// Solution of the orbit boundary problem
///   w_0 = start(t), w_{k+1} = f(w_k) for k < N, end.defect(w_N) = 0.
struct LineOrbit {
    cx t{};
    std::vector<Point2> nodes;  // w_0 .. w_N
    double residual = 0.0;
    int iterations = 0;
};

/// Newton's method on the boundary problem from initial nodes w_1..w_N and
/// parameter t, with damping by backtracking. The Jacobian is block
/// bidiagonal; it is factored as a band matrix with partial pivoting, which
/// stays stable for long orbits where products of Df would not. Throws
/// NoConvergence.
LineOrbit solve_line_orbit(const HenonMap& f, const AffineLine& start, const AffineLine& end, cx t0,
                           std::span<const Point2> initial, double tol, int max_iter = 40);

/// Banded complex LU with partial pivoting (kl sub-, ku super-diagonals).
class BandedLU {
public:
    BandedLU(int n, int kl, int ku);
    cx& at(int i, int j);
    /// Factor in place; returns false when a zero pivot is met.
    bool factor();
    /// Solves A x = b in place after factor().
    void solve(std::span<cx> b) const;

private:
    int n_, kl_, ku_, ld_;
    std::vector<cx> ab_;
    std::vector<int> piv_;
    cx& ab(int i, int j) { return ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)]; }
    const cx& ab(int i, int j) const { return ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)]; }
};

}  // namespace henon
