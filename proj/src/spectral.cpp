#include "henon/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace henon {

namespace {

Point2 unit(Point2 v)
{
    const double n = norm2(v);
    return n > 0.0 ? cx{1.0 / n} * v : Point2{1.0, 0.0};
}

// Eigenvector of m for eigenvalue lam, from whichever row of (m - lam I) is larger.
Point2 eigenvector(const Mat2& m, cx lam)
{
    const Point2 v1{m.b, lam - m.a};
    const Point2 v2{lam - m.d, m.c};
    const Point2 v = norm2(v1) >= norm2(v2) ? v1 : v2;
    if (norm2(v) == 0.0) return {1.0, 0.0};
    return unit(v);
}

double dist_from_log(double log_mod, double arg)
{
    constexpr double lo = -6.907755278982137;  // log 1e-3
    constexpr double hi = 6.907755278982137;
    if (log_mod >= lo && log_mod <= hi) return std::abs(std::polar(std::exp(log_mod), arg) - 1.0);
    // far from the unit circle |lambda - 1| >= ||lambda| - 1|, which is within 1e-3 relative
    if (log_mod > hi) return log_mod > 700.0 ? std::numeric_limits<double>::max() : std::expm1(log_mod);
    return -std::expm1(log_mod);
}

}  // namespace

double principal_angle(const Point2& u, const Point2& v)
{
    const Point2 a = unit(u);
    const Point2 b = unit(v);
    const double inner = std::abs(std::conj(a.x) * b.x + std::conj(a.y) * b.y);
    const double wedge = std::abs(a.x * b.y - a.y * b.x);
    return std::atan2(wedge, inner);
}

Mat2 naive_orbit_product(const HenonMap& f, std::span<const Point2> orbit)
{
    Mat2 m = Mat2::identity();
    for (const auto& z : orbit) m = jacobian(f, z) * m;
    return m;
}

SpectralData differential_along_orbit(const HenonMap& f, std::span<const Point2> orbit, double residual_tol)
{
    if (orbit.empty()) throw DegenerateOrbit("empty orbit");
    if (!(cyclic_residual(f, orbit) <= residual_tol)) throw DegenerateOrbit("orbit residual too large");

    Mat2 p = Mat2::identity();
    double log_scale = 0.0;
    double log_det = 0.0;
    double arg_det = 0.0;
    for (const auto& z : orbit) {
        const Mat2 j = jacobian(f, z);
        const cx dj = j.det();
        log_det += std::log(std::abs(dj));
        arg_det += std::arg(dj);
        p = j * p;
        const double s = p.max_abs();
        p = cx{1.0 / s} * p;
        log_scale += std::log(s);
    }

    // Scaled problem: eigenvalues of p, whose determinant is exp(log_det - 2 log_scale).
    const cx tr = p.trace();
    const double log_det_scaled = log_det - 2.0 * log_scale;
    cx lam1;
    double log1 = 0.0, arg1 = 0.0;
    if (log_det_scaled < -600.0 || (std::abs(tr) > 0.0 && log_det_scaled < 2.0 * std::log(std::abs(tr)) - 80.0)) {
        // det negligible against tr^2: lambda1 = tr to full precision
        lam1 = tr;
    } else {
        const cx det = std::polar(std::exp(log_det_scaled), arg_det);
        const cx root = std::sqrt(tr * tr - 4.0 * det);
        const cx plus = 0.5 * (tr + root);
        const cx minus = 0.5 * (tr - root);
        lam1 = std::abs(plus) >= std::abs(minus) ? plus : minus;
    }
    log1 = std::log(std::abs(lam1)) + log_scale;
    arg1 = std::arg(lam1);
    const double log2 = log_det - log1;
    const double arg2 = std::remainder(arg_det - arg1, 2.0 * std::numbers::pi);

    SpectralData s;
    s.log_moduli = {log1, log2};
    s.args = {std::remainder(arg1, 2.0 * std::numbers::pi), arg2};
    const cx lam2_scaled = log2 - log_scale < -700.0 ? cx{0.0} : std::polar(std::exp(log2 - log_scale), arg2);
    s.e_u = eigenvector(p, lam1);
    s.e_s = eigenvector(p, lam2_scaled);
    s.angle_us = principal_angle(s.e_u, s.e_s);
    s.dist_to_one = std::min(dist_from_log(log1, s.args[0]), dist_from_log(log2, s.args[1]));
    return s;
}

PointClass classify(const SpectralData& spec, int n, const HenonMap& f, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("classify: eps must lie in (0, 1)");
    const double l1 = spec.log_moduli[0];
    const double l2 = spec.log_moduli[1];
    auto near = [](double v, double t) { return std::abs(v - t) < kThresholdTie; };
    if (near(l1, 0.0) || near(l2, 0.0)) return PointClass::indeterminate;
    if (l2 > 0.0) return PointClass::repelling;
    if (l1 < 0.0) return PointClass::attracting;
    const double up = 0.5 * n * std::log(f.d_plus() - eps);
    const double down = -0.5 * n * std::log(f.d_minus() - eps);
    if (near(l1, up) || near(l2, down)) return PointClass::indeterminate;
    return (l1 > up && l2 < down) ? PointClass::saddle_eps : PointClass::saddle;
}

Directions stable_unstable_directions(const SpectralData& spec)
{
    const double dl = spec.log_moduli[0] - spec.log_moduli[1];
    const double da = std::abs(std::remainder(spec.args[0] - spec.args[1], 2.0 * std::numbers::pi));
    if (dl < 1e-10 && da < 1e-10) throw NearDefective("eigenvalues coincide");
    return {spec.e_s, spec.e_u, spec.angle_us};
}

TangencyStats tangency_statistic(std::span<const PeriodicRecord> records, double eta, int d)
{
    if (!(eta > 0.0)) throw std::invalid_argument("tangency_statistic: eta must be > 0");
    TangencyStats out;
    constexpr int lo = -16, hi = 16;
    for (int b = lo - 1; b <= hi; ++b) {
        const double l = b == lo - 1 ? -std::numeric_limits<double>::infinity() : b;
        const double h = b == hi ? std::numeric_limits<double>::infinity() : b + 1;
        out.histogram.push_back({l, h, 0});
    }
    int n = 0;
    for (const auto& r : records) {
        if (!r.spectral) throw std::invalid_argument("tangency_statistic: record without spectral data");
        n = r.n;
        const double dist = r.spectral->dist_to_one;
        if (dist < eta) ++out.count_near_tangent;
        const double l = dist > 0.0 ? std::log10(dist) : -std::numeric_limits<double>::infinity();
        int idx = l < lo ? 0 : (l >= hi ? static_cast<int>(out.histogram.size()) - 1 : static_cast<int>(std::floor(l)) - lo + 1);
        ++out.histogram[idx].count;
    }
    out.fraction = records.empty() ? 0.0 : static_cast<double>(out.count_near_tangent) / std::pow(static_cast<double>(d), n);
    return out;
}

void classify_records(const HenonMap& f, std::vector<PeriodicRecord>& records, double eps, Execution exec)
{
    for_each_index(records.size(), exec, [&](std::size_t i) {
        auto& r = records[i];
        r.spectral = differential_along_orbit(f, r.orbit);
        r.classification = classify(*r.spectral, r.n, f, eps);
    });
}

}  // namespace henon
