#pragma once

#include <optional>

#include "henon/map.hpp"

namespace henon {

/// Radius R such that |y| >= max(|x|, R) implies |y'| >= 2|y| for (x', y') = f(x, y),
/// and symmetrically in x for f^{-1}. K is contained in the open bidisk of radius R.
double filtration_radius(const HenonMap& f);

/// Same bound for a single factor (forward and backward), used by filtration_radius.
double factor_radius(const ElementaryFactor& factor);

/// First index n <= max_n at which the orbit enters the escape region, or
/// nullopt when it stays out of it (the numerical stand-in for K+ / K-).
std::optional<int> escape_time(const HenonMap& f, const Point2& z, int max_n, Direction dir);

struct GreenValue {
    double value = 0.0;
    int depth = 0;
    double error_bound = 0.0;
};

class MaxDepthExceeded : public Error {
public:
    using Error::Error;
};

inline constexpr int kDefaultMaxDepth = 1000;
inline constexpr int kMinTailSteps = 10;

/// G+ (Direction::forward) or G- (Direction::backward) by escape-rate limit.
///
/// After the orbit enters the escape region it is continued in a scaled
/// representation (log|y|, x/y, 1/y) that cannot overflow, for at least
/// kMinTailSteps more steps and until the last increment falls below tol.
/// Orbits that never escape and stay in the bidisk return value 0 at depth
/// max_depth. Throws MaxDepthExceeded if the orbit leaves the bidisk without
/// ever entering the escape region.
GreenValue green(const HenonMap& f, const Point2& z, Direction dir, double tol,
                 int max_depth = kDefaultMaxDepth);

enum class KVerdict { in_k, escapes, undetermined };

KVerdict in_K(const HenonMap& f, const Point2& z, int max_n);

const char* to_string(KVerdict v);

}  // namespace henon
