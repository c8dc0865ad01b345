#pragma once

#include <span>
#include <vector>

#include "henon/types.hpp"

namespace henon::poly {

/// Dense univariate polynomial, ascending coefficients.
using Poly = std::vector<cx>;

cx eval(std::span<const cx> p, cx t);
Poly derivative(std::span<const cx> p);
Poly add(std::span<const cx> p, std::span<const cx> q);
Poly scale(std::span<const cx> p, cx s);
Poly mul(std::span<const cx> p, std::span<const cx> q);
/// p(q(t)).
Poly compose(std::span<const cx> p, std::span<const cx> q);
/// Drops trailing coefficients with |c| <= rel * max|c|.
Poly trim(Poly p, double rel = 0.0);
int degree(std::span<const cx> p);

/// Sylvester resultant of two polynomials with nonzero leading coefficients.
cx resultant(std::span<const cx> p, std::span<const cx> q);

/// All roots from the eigenvalues of the companion matrix, each polished by a
/// few Newton steps on p.
std::vector<cx> roots(std::span<const cx> p);

/// Coefficients of the degree < samples.size() polynomial taking the given values
/// at t_k = radius * exp(2 pi i k / K).
Poly interpolate_on_circle(std::span<const cx> values, double radius);

}  // namespace henon::poly
