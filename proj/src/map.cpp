#include "henon/map.hpp"

#include <fstream>
#include <sstream>

#include "henon/escape.hpp"

namespace henon {

cx ElementaryFactor::p(cx t) const
{
    cx acc = 1.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
    return acc;
}

cx ElementaryFactor::dp(cx t) const
{
    const int d = degree();
    cx acc = static_cast<double>(d);
    for (int j = d - 1; j >= 1; --j) acc = acc * t + static_cast<double>(j) * coeffs[j];
    return acc;
}

HenonMap::HenonMap(std::vector<ElementaryFactor> factors) : factors_(std::move(factors))
{
    if (factors_.empty()) throw ParseError("map needs at least one factor");
    d_plus_ = 1;
    for (const auto& fac : factors_) {
        if (fac.degree() < 2) throw ParseError("factor degree must be >= 2");
        if (fac.a == cx{0.0}) throw ParseError("factor coefficient a must be nonzero");
        for (const auto& c : fac.coeffs)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw ParseError("non-finite coefficient");
        d_plus_ *= fac.degree();
        det_ *= fac.a;
    }
    radius_ = filtration_radius(*this);
}

HenonMap HenonMap::quadratic(cx a, cx c)
{
    return HenonMap({ElementaryFactor{{c, 0.0}, a}});
}

namespace {

void check_overflow(const Point2& z)
{
    if (!is_finite(z) || max_norm(z) > kOverflowCeiling) throw OverflowError("orbit overflow");
}

}  // namespace

Point2 evaluate(const HenonMap& f, const Point2& z)
{
    Point2 w = z;
    for (const auto& fac : f.factors()) {
        w = {w.y, fac.p(w.y) - fac.a * w.x};
        check_overflow(w);
    }
    return w;
}

Point2 evaluate_inverse(const HenonMap& f, const Point2& z)
{
    Point2 w = z;
    const auto& fs = f.factors();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        w = {(it->p(w.x) - w.y) / it->a, w.x};
        check_overflow(w);
    }
    return w;
}

Point2 step(const HenonMap& f, const Point2& z, Direction dir)
{
    return dir == Direction::forward ? evaluate(f, z) : evaluate_inverse(f, z);
}

Mat2 jacobian(const HenonMap& f, const Point2& z)
{
    Mat2 acc = Mat2::identity();
    Point2 w = z;
    for (const auto& fac : f.factors()) {
        const Mat2 local{0.0, 1.0, -fac.a, fac.dp(w.y)};
        acc = local * acc;
        w = {w.y, fac.p(w.y) - fac.a * w.x};
        check_overflow(w);
    }
    return acc;
}

Mat2 jacobian_inverse(const HenonMap& f, const Point2& z)
{
    // f_j^{-1}(x, y) = ((p_j(x) - y) / a_j, x)
    Mat2 acc = Mat2::identity();
    Point2 w = z;
    const auto& fs = f.factors();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        const Mat2 local{it->dp(w.x) / it->a, -1.0 / it->a, 1.0, 0.0};
        acc = local * acc;
        w = {(it->p(w.x) - w.y) / it->a, w.x};
        check_overflow(w);
    }
    return acc;
}

bool in_escape_region(const Point2& z, double radius, Direction dir)
{
    const double ax = std::abs(z.x);
    const double ay = std::abs(z.y);
    return dir == Direction::forward ? ay >= std::max(ax, radius) : ax >= std::max(ay, radius);
}

Orbit iterate_orbit(const HenonMap& f, const Point2& z, int n, Direction dir,
                    std::optional<double> escape_radius)
{
    if (n < 0) throw std::invalid_argument("iterate_orbit: n must be >= 0");
    Orbit out;
    out.points.reserve(static_cast<std::size_t>(n) + 1);
    out.points.push_back(z);
    for (int k = 0;; ++k) {
        if (escape_radius && in_escape_region(out.points.back(), *escape_radius, dir)) {
            out.escaped_at = k;
            break;
        }
        if (k == n) break;
        out.points.push_back(step(f, out.points.back(), dir));
    }
    return out;
}

nlohmann::json cx_to_json(cx v) { return nlohmann::json::array({v.real(), v.imag()}); }

cx cx_from_json(const nlohmann::json& j)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw ParseError("complex value must be [re, im]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json point_to_json(const Point2& p)
{
    return nlohmann::json::array({p.x.real(), p.x.imag(), p.y.real(), p.y.imag()});
}

Point2 point_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 4) throw ParseError("point must be [xr, xi, yr, yi]");
    return {{j.at(0).get<double>(), j.at(1).get<double>()},
            {j.at(2).get<double>(), j.at(3).get<double>()}};
}

HenonMap map_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("factors") || !j.at("factors").is_array())
        throw ParseError("map description needs a \"factors\" array");
    std::vector<ElementaryFactor> factors;
    for (const auto& fj : j.at("factors")) {
        ElementaryFactor fac;
        if (!fj.contains("coeffs") || !fj.contains("a"))
            throw ParseError("factor needs \"coeffs\" and \"a\"");
        for (const auto& c : fj.at("coeffs")) fac.coeffs.push_back(cx_from_json(c));
        fac.a = cx_from_json(fj.at("a"));
        factors.push_back(std::move(fac));
    }
    return HenonMap(std::move(factors));
}

nlohmann::json map_to_json(const HenonMap& f)
{
    nlohmann::json fs = nlohmann::json::array();
    for (const auto& fac : f.factors()) {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : fac.coeffs) cs.push_back(cx_to_json(c));
        fs.push_back({{"coeffs", cs}, {"a", cx_to_json(fac.a)}});
    }
    return {{"factors", fs}};
}

HenonMap load_map(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open map file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return map_from_json(j);
}

}  // namespace henon
