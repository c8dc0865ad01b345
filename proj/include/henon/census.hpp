#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "henon/map.hpp"
#include "henon/parallel.hpp"

namespace henon {

enum class PointClass { attracting, repelling, saddle, saddle_eps, indeterminate };

const char* to_string(PointClass c);
PointClass point_class_from_string(const std::string& s);

/// Spectral data of Df^n along a periodic orbit, with |lambda1| >= |lambda2|.
struct SpectralData {
    std::array<double, 2> log_moduli{};
    std::array<double, 2> args{};
    Point2 e_u;
    Point2 e_s;
    double angle_us = 0.0;
    double dist_to_one = 0.0;
};

struct PeriodicRecord {
    Point2 point;
    int n = 0;
    int exact_period = 0;
    /// Multiple-shooting residual max_i |f(z_i) - z_{i+1}| of the refined orbit.
    double residual = 0.0;
    /// The refined cycle starting at `point`; orbit[0] == point.
    std::vector<Point2> orbit;
    std::optional<SpectralData> spectral;
    std::optional<PointClass> classification;
    bool multiplicity_flag = false;
};

struct RefineResult {
    std::vector<Point2> orbit;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;
    /// |det(I - Df^n)| relative to (1 + |Df^n|)^2 at the solution.
    double relative_singularity = 1.0;
};

/// max_i |f(z_i) - z_{(i+1) mod n}| in the max-norm.
double cyclic_residual(const HenonMap& f, std::span<const Point2> orbit);

inline constexpr double kSingularTol = 1e-8;

/// Newton's method on the cyclic system f(z_i) = z_{i+1 mod n}.
///
/// Each step eliminates the block-cyclic Jacobian sequentially: with
/// d_{i+1} = A_i d_i + F_i the cycle condition becomes (I - A_{n-1}...A_0) d_0 = b.
/// Steps are damped by backtracking on the residual. Throws NoConvergence or
/// SingularJacobian.
RefineResult newton_orbit_refine(const HenonMap& f, std::span<const Point2> orbit, double tol,
                                 int max_iter = 60);

struct CensusDiagnostics {
    std::int64_t attempted = 0;
    std::int64_t converged = 0;
    std::int64_t no_convergence = 0;
    std::int64_t singular = 0;
    std::int64_t deduped = 0;
    std::vector<std::string> warnings;
};

struct CensusResult {
    std::vector<PeriodicRecord> records;
    CensusDiagnostics diagnostics;
};

inline constexpr double kDedupRadius = 1e-6;
inline constexpr double kDefaultCensusTol = 1e-9;

/// Distinct solutions of f^n(z) = z found by multiple-shooting Newton from
/// `seeds` starting orbits. Each converged cycle contributes all of its points.
/// Output is sorted lexicographically and independent of the thread count.
CensusResult census(const HenonMap& f, int n, std::int64_t seeds, std::uint64_t rng_seed,
                    double tol = kDefaultCensusTol, Execution exec = Execution::parallel);

/// Starting orbit number `index` of a census run (deterministic in its arguments).
std::vector<Point2> census_seed_orbit(const HenonMap& f, int n, std::int64_t index,
                                      std::int64_t seeds, std::uint64_t rng_seed);

/// Fills exact_period: the smallest divisor m of n with |z_m - z_0| < tol along the cycle.
std::vector<PeriodicRecord> exact_period_filter(std::vector<PeriodicRecord> records,
                                                double tol = 1e-8);

}  // namespace henon
