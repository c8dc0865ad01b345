#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "henon/types.hpp"

namespace henon {

/// One elementary factor (x, y) -> (y, p(y) - a x) with p monic of degree >= 2.
///
/// `coeffs` holds c_0 .. c_{d-1}; the leading coefficient 1 is implied.
struct ElementaryFactor {
    std::vector<cx> coeffs;
    cx a{1.0};

    int degree() const { return static_cast<int>(coeffs.size()); }
    cx p(cx t) const;
    cx dp(cx t) const;
};

/// Composition f = f_m o ... o f_1 of elementary factors.
class HenonMap {
public:
    explicit HenonMap(std::vector<ElementaryFactor> factors);

    /// f(x, y) = (y, y^2 + c - a x).
    static HenonMap quadratic(cx a, cx c);

    const std::vector<ElementaryFactor>& factors() const { return factors_; }
    int d_plus() const { return d_plus_; }
    int d_minus() const { return d_plus_; }
    int p() const { return 1; }
    int dim() const { return 2; }
    /// Main dynamical degree; equals d_plus = d_minus for k = 2, p = 1.
    int d() const { return d_plus_; }
    /// Constant Jacobian determinant, the product of the factor coefficients a_j.
    cx jacobian_det() const { return det_; }
    /// Escape radius, see filtration_radius().
    double radius() const { return radius_; }

private:
    std::vector<ElementaryFactor> factors_;
    int d_plus_ = 0;
    cx det_{1.0};
    double radius_ = 0.0;
};

enum class Direction { forward, backward };

Point2 evaluate(const HenonMap& f, const Point2& z);
Point2 evaluate_inverse(const HenonMap& f, const Point2& z);
Point2 step(const HenonMap& f, const Point2& z, Direction dir);

/// Df(z), chain rule over the factors.
Mat2 jacobian(const HenonMap& f, const Point2& z);
/// D(f^{-1})(z).
Mat2 jacobian_inverse(const HenonMap& f, const Point2& z);

/// Result of iterate_orbit. When `escaped_at` is set the orbit stops at that index.
struct Orbit {
    std::vector<Point2> points;
    std::optional<int> escaped_at;
};

/// [z, f^{+-1}(z), ..., f^{+-n}(z)], stopping at the first point inside the
/// escape region of the given radius. Without a radius the orbit runs to n and
/// an OverflowError propagates if it diverges.
Orbit iterate_orbit(const HenonMap& f, const Point2& z, int n, Direction dir,
                    std::optional<double> escape_radius = std::nullopt);

/// True when z lies in the forward (|y| >= max(|x|, R)) or backward
/// (|x| >= max(|y|, R)) escape region.
bool in_escape_region(const Point2& z, double radius, Direction dir);

// JSON map description: {"factors":[{"coeffs":[[re,im],...],"a":[re,im]}]}.
HenonMap map_from_json(const nlohmann::json& j);
nlohmann::json map_to_json(const HenonMap& f);
HenonMap load_map(const std::string& path);

nlohmann::json cx_to_json(cx v);
cx cx_from_json(const nlohmann::json& j);
nlohmann::json point_to_json(const Point2& p);
Point2 point_from_json(const nlohmann::json& j);

}  // namespace henon
