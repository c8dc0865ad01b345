#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "henon/bvp.hpp"
#include "henon/measure.hpp"
#include "henon/parallel.hpp"

namespace henon {

/// Base uniform in the radius-`scale` bidisk, direction uniform on the unit
/// sphere of C^2, redrawn until is_generic holds.
AffineLine random_line(std::uint64_t rng_seed, double scale);

nlohmann::json to_json(const AffineLine& l);
AffineLine line_from_json(const nlohmann::json& j);

struct SamplerDiagnostics {
    std::int64_t attempted = 0;
    std::int64_t converged = 0;
    std::int64_t duplicates = 0;
    /// Distinct roots, before the support check.
    std::int64_t roots = 0;
    std::int64_t rejected_not_in_k = 0;
    /// Roots that passed the support check; root_deficit = 1 - found / d^(2n).
    std::int64_t found = 0;
    double expected = 0.0;
    double root_deficit = 0.0;
    std::vector<std::string> warnings;
};

/// One solution w_0 -> ... -> w_{2n} of the boundary problem.
struct SampleRoot {
    cx t;
    /// w_n, the sample point.
    Point2 point;
    /// w_0 on L- and w_{2n} on L+.
    Point2 first;
    Point2 last;
    double residual = 0.0;
    double g_plus = 0.0;
    double g_minus = 0.0;
    bool verified = false;
};

struct SampleResult {
    /// Uniform measure on the verified points; empty when none passed.
    EmpiricalMeasure measure;
    SamplerDiagnostics diagnostics;
    /// Every distinct root, sorted by sample point.
    std::vector<SampleRoot> roots;
};

inline constexpr double kSampleDedupRadius = 1e-8;
inline constexpr double kSupportTol = 5e-3;
inline constexpr int kSupportDepth = 200;
inline constexpr double kCertifyingDeficit = 0.05;

/// Points of f^n(L-) intersected with f^{-n}(L+), lines = (L+, L-).
///
/// A root t of l+(f^{2n}(gamma-(t))) is found as the boundary problem
/// gamma-(t) = w_0 -> w_1 -> ... -> w_{2n} in L+, and contributes w_n.
/// The first min(budget, d^{2n}) searches start from branch codes: every
/// elementary step (u, v) -> (v, p(v) - a u) is inverted on a chosen branch of
/// p, which pins down one orbit per code when K is a horseshoe. Remaining
/// searches start from t on circles |t| = r_k (geometric in [1e-3, 1e3]) with
/// nodes from the orbit of gamma-(t) while it stays in the bidisk and random
/// otherwise. Solutions are deduplicated by w_n within kSampleDedupRadius and
/// a point enters the measure only if G+ and G- are below support_tol at depth
/// kSupportDepth. Since G+(w_n) = d^-n G+(w_2n), this needs n large enough for
/// the lines in use.
SampleResult sample_mu(const HenonMap& f, int n, const std::pair<AffineLine, AffineLine>& lines,
                       std::int64_t budget, std::uint64_t rng_seed, Execution exec = Execution::parallel,
                       double support_tol = kSupportTol);

/// Lines (L+, L-) used by the pipeline for a given seed, at scale R.
std::pair<AffineLine, AffineLine> default_lines(const HenonMap& f, std::uint64_t rng_seed);

/// Root of p(u) = v closest to ref.
cx branch_root(const ElementaryFactor& fac, cx v, cx ref);

/// Zeros of p, the reference points that label the inverse branches.
std::vector<cx> factor_zeros(const ElementaryFactor& fac);

/// Initial elementary sequence u_0 .. u_{2nm+1} for branch code `code`
/// (mixed-radix digits over the factor degrees); exposed for testing.
std::vector<cx> branch_code_sequence(const HenonMap& f, int steps, const AffineLine& start,
                                     const AffineLine& end, std::uint64_t code, int sweeps = 40);

}  // namespace henon
