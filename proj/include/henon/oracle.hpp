#pragma once

#include <vector>

#include "henon/map.hpp"
#include "henon/poly.hpp"

namespace henon {

class DegreeOverflow : public Error {
public:
    using Error::Error;
};

struct OracleRoot {
    Point2 point;
    int multiplicity = 1;
};

struct OracleResult {
    std::vector<OracleRoot> roots;
    /// The eliminated univariate polynomial in y (ascending coefficients).
    poly::Poly eliminant;
    int total_multiplicity = 0;
};

/// Exact-count solver for f^n(z) = z at small n.
///
/// Writing the orbit as the sequence u_k with z_k = (u_k, u_{k+1}) turns the
/// cycle condition into N = n * (number of factors) polynomial equations
/// u_{k+2} + a_k u_k = p_k(u_{k+1}). All unknowns but u_0 and u_1 = y are
/// substituted away, u_0 is eliminated by a Sylvester resultant (sampled on a
/// circle and interpolated), the eliminant's roots come from its companion
/// matrix, and x = u_0 is recovered as the common root of the two remaining
/// equations. Multiplicities are the sizes of root clusters. Throws
/// DegreeOverflow for N > 3.
OracleResult oracle_small_n(const HenonMap& f, int n);

}  // namespace henon
