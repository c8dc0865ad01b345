#include "henon/escape.hpp"

#include <cmath>

namespace henon {

namespace {

// Largest positive root of r^d - sum_{j<d} |c_j| r^j - k r. The polynomial has a
// single sign change, hence exactly one positive root, and is positive beyond it.
double positive_root(const ElementaryFactor& fac, double k)
{
    const int d = fac.degree();
    auto g = [&](double r) {
        double acc = 1.0;
        for (int j = d - 1; j >= 1; --j) acc = acc * r - std::abs(fac.coeffs[j]);
        return acc * r - std::abs(fac.coeffs[0]) - k * r;
    };
    double hi = 1.0;
    while (g(hi) < 0.0) hi *= 2.0;
    double lo = hi / 2.0;
    if (g(lo) >= 0.0) lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) lo = mid; else hi = mid;
    }
    return hi;
}

}  // namespace

double factor_radius(const ElementaryFactor& fac)
{
    const double a = std::abs(fac.a);
    // forward:  |p(y) - a x| >= |y|^d - sum |c_j||y|^j - a|y| >= 2|y|
    // backward: |p(x) - y| / a >= (|x|^d - sum |c_j||x|^j - |x|) / a >= 2|x|
    const double fwd = positive_root(fac, a + 2.0);
    const double bwd = positive_root(fac, 1.0 + 2.0 * a);
    return std::max({1.0, fwd, bwd}) * (1.0 + 1e-12);
}

double filtration_radius(const HenonMap& f)
{
    double r = 1.0;
    for (const auto& fac : f.factors()) r = std::max(r, factor_radius(fac));
    return r;
}

std::optional<int> escape_time(const HenonMap& f, const Point2& z, int max_n, Direction dir)
{
    if (max_n < 1) throw std::invalid_argument("escape_time: max_n must be >= 1");
    const double R = f.radius();
    Point2 w = z;
    for (int n = 0; n <= max_n; ++n) {
        if (in_escape_region(w, R, dir)) return n;
        if (n < max_n) w = step(f, w, dir);
    }
    return std::nullopt;
}

namespace {

// Scaled state in the escape region: the growing coordinate u = exp(log_u) * phase,
// ratio = (other coordinate)/u, inv = 1/u.
struct Scaled {
    double log_u;
    cx ratio;
    cx inv;
};

// One elementary step in scaled form. Forward factors grow y, inverse factors grow x.
// Returns the increment log|Q| (including -log|a| for inverse factors).
double scaled_factor_step(Scaled& s, const ElementaryFactor& fac, Direction dir)
{
    const int d = fac.degree();
    // Q = 1 + sum_{i<d} c_i inv^{d-i} - lin * ratio * inv^{d-1}
    std::vector<cx> pw(static_cast<std::size_t>(d) + 1);
    pw[0] = 1.0;
    for (int i = 1; i <= d; ++i) pw[i] = pw[i - 1] * s.inv;
    cx q = 1.0;
    for (int i = 0; i < d; ++i) q += fac.coeffs[i] * pw[d - i];
    if (dir == Direction::forward) {
        q -= fac.a * s.ratio * pw[d - 1];
        s.ratio = pw[d - 1] / q;
        s.inv = pw[d] / q;
        const double inc = std::log(std::abs(q));
        s.log_u = d * s.log_u + inc;
        return inc;
    }
    q -= s.ratio * pw[d - 1];
    s.ratio = fac.a * pw[d - 1] / q;
    s.inv = fac.a * pw[d] / q;
    const double inc = std::log(std::abs(q)) - std::log(std::abs(fac.a));
    s.log_u = d * s.log_u + inc;
    return inc;
}

}  // namespace

GreenValue green(const HenonMap& f, const Point2& z, Direction dir, double tol, int max_depth)
{
    if (!(tol > 0.0)) throw std::invalid_argument("green: tol must be > 0");
    const double R = f.radius();
    const double d = f.d();
    Point2 w = z;
    bool stayed_in_bidisk = true;
    int n = 0;
    for (;; ++n) {
        if (in_escape_region(w, R, dir)) break;
        if (max_norm(w) > R) stayed_in_bidisk = false;
        if (n == max_depth) {
            if (!stayed_in_bidisk)
                throw MaxDepthExceeded("orbit left the bidisk without escaping");
            return {0.0, max_depth, 0.0};
        }
        w = step(f, w, dir);
    }

    const bool fwd = dir == Direction::forward;
    const cx grow = fwd ? w.y : w.x;
    const cx other = fwd ? w.x : w.y;
    Scaled s{std::log(std::abs(grow)), other / grow, 1.0 / grow};

    // value = d^{-n} log|u_n|, accumulated as a running sum so nothing grows.
    double scale = std::pow(d, -n);
    double value = scale * s.log_u;
    double last_inc = 0.0;
    int extra = 0;
    const auto& fs = f.factors();
    while (true) {
        // Full map step: log|u'| = d log|u| + E, E = sum_j (prod_{i>j} d_i) inc_j.
        double e = 0.0;
        if (fwd) {
            for (const auto& fac : fs) e = e * fac.degree() + scaled_factor_step(s, fac, dir);
        } else {
            for (auto it = fs.rbegin(); it != fs.rend(); ++it)
                e = e * it->degree() + scaled_factor_step(s, *it, dir);
        }
        ++n;
        ++extra;
        scale /= d;
        last_inc = scale * e;
        value += last_inc;
        if ((extra >= kMinTailSteps && std::abs(last_inc) < tol) || n >= max_depth + kMinTailSteps)
            break;
    }
    const double bound = std::abs(last_inc) / (d - 1.0);
    return {std::max(value, 0.0), n, bound};
}

KVerdict in_K(const HenonMap& f, const Point2& z, int max_n)
{
    if (max_n < 1) throw std::invalid_argument("in_K: max_n must be >= 1");
    const double R = f.radius();
    bool left_bidisk = false;
    for (Direction dir : {Direction::forward, Direction::backward}) {
        Point2 w = z;
        for (int n = 0; n <= max_n; ++n) {
            if (in_escape_region(w, R, dir)) return KVerdict::escapes;
            if (max_norm(w) > R) left_bidisk = true;
            if (n < max_n) w = step(f, w, dir);
        }
    }
    return left_bidisk ? KVerdict::undetermined : KVerdict::in_k;
}

const char* to_string(KVerdict v)
{
    switch (v) {
    case KVerdict::in_k: return "InK";
    case KVerdict::escapes: return "Escapes";
    case KVerdict::undetermined: return "Undetermined";
    }
    return "?";
}

}  // namespace henon
