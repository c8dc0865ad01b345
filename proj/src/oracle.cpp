#include "henon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace henon {

namespace {

using poly::Poly;

Poly full_poly(const ElementaryFactor& fac)
{
    Poly p(fac.coeffs.begin(), fac.coeffs.end());
    p.push_back(1.0);
    return p;
}

struct Elimination {
    const HenonMap& f;
    int steps;  // N

    const ElementaryFactor& factor(int k) const
    {
        const auto& fs = f.factors();
        return fs[static_cast<std::size_t>(k) % fs.size()];
    }

    // The last two cycle equations as polynomials in u_0 at fixed y = t.
    std::pair<Poly, Poly> equations(cx t) const
    {
        const int N = steps;
        std::vector<Poly> u(static_cast<std::size_t>(N));
        u[0] = {0.0, 1.0};
        u[1] = {t};
        for (int k = 0; k + 2 < N; ++k) {
            const auto& fac = factor(k);
            u[k + 2] = poly::add(poly::compose(full_poly(fac), u[k + 1]), poly::scale(u[k], -fac.a));
        }
        const auto& fa = factor(N - 2);
        Poly a = poly::add(u[0], poly::scale(u[N - 2], fa.a));
        a = poly::add(a, poly::scale(poly::compose(full_poly(fa), u[N - 1]), -1.0));
        const auto& fb = factor(N - 1);
        Poly b = poly::add(Poly{t}, poly::scale(u[N - 1], fb.a));
        b = poly::add(b, poly::scale(poly::compose(full_poly(fb), u[0]), -1.0));
        return {poly::trim(std::move(a), 1e-14), poly::trim(std::move(b), 1e-14)};
    }

    // Bound on the total degree of A and B in (u_0, t).
    std::pair<int, int> total_degrees() const
    {
        const int N = steps;
        std::vector<int> deg(static_cast<std::size_t>(N));
        deg[0] = 1;
        deg[1] = 1;
        for (int k = 0; k + 2 < N; ++k) deg[k + 2] = std::max(factor(k).degree() * deg[k + 1], deg[k]);
        const int da = std::max({deg[0], deg[N - 2], factor(N - 2).degree() * deg[N - 1]});
        const int db = std::max({1, deg[N - 1], factor(N - 1).degree()});
        return {da, db};
    }
};

// Newton on the scalar cycle equations u_{k+2} + a_k u_k - p_k(u_{k+1}) = 0,
// k = 0..N-1 (indices mod N), starting from a back-substituted root.
Point2 polish(const HenonMap& f, int N, Point2 z)
{
    const auto& fs = f.factors();
    auto fac = [&](int k) -> const ElementaryFactor& { return fs[static_cast<std::size_t>(k) % fs.size()]; };
    Eigen::VectorXcd u(N);
    u(0) = z.x;
    if (N > 1) u(1) = z.y;
    for (int k = 0; k + 2 < N; ++k) u(k + 2) = fac(k).p(u(k + 1)) - fac(k).a * u(k);
    for (int it = 0; it < 4; ++it) {
        Eigen::VectorXcd e(N);
        Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(N, N);
        for (int k = 0; k < N; ++k) {
            const int k1 = (k + 1) % N, k2 = (k + 2) % N;
            e(k) = u(k2) + fac(k).a * u(k) - fac(k).p(u(k1));
            j(k, k2) += 1.0;
            j(k, k) += fac(k).a;
            j(k, k1) -= fac(k).dp(u(k1));
        }
        const auto lu = j.fullPivLu();
        if (!lu.isInvertible()) break;
        const Eigen::VectorXcd step = lu.solve(e);
        if (!step.allFinite() || step.norm() > 1e-3 * (1.0 + u.norm())) break;
        u -= step;
    }
    return {u(0), N > 1 ? u(1) : u(0)};
}

}  // namespace

OracleResult oracle_small_n(const HenonMap& f, int n)
{
    if (n < 1) throw std::invalid_argument("oracle_small_n: n must be >= 1");
    const int N = n * static_cast<int>(f.factors().size());
    if (N > 3) throw DegreeOverflow("symbolic elimination is limited to 3 elementary steps");

    long long expected = 1;
    for (int i = 0; i < n; ++i) expected *= f.d();
    const double R = f.radius();

    OracleResult out;
    if (N == 1) {
        // u = (1 + a) u - p(u) on the diagonal
        const auto& fac = f.factors().front();
        Poly q = poly::scale(full_poly(fac), -1.0);
        q[1] += 1.0 + fac.a;
        out.eliminant = q;
    } else {
        const Elimination el{f, N};
        const auto [ta, tb] = el.total_degrees();
        std::size_t k = 1;
        while (k < static_cast<std::size_t>(ta * tb + 1)) k *= 2;
        std::vector<cx> values(k);
        for (std::size_t i = 0; i < k; ++i) {
            const cx t = std::polar(R, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k));
            const auto [a, b] = el.equations(t);
            values[i] = poly::resultant(a, b);
        }
        Poly res = poly::interpolate_on_circle(values, R);
        // trim relative to the coefficient sizes on the sampling circle
        double mx = 0.0;
        for (std::size_t j = 0; j < res.size(); ++j) mx = std::max(mx, std::abs(res[j]) * std::pow(R, double(j)));
        while (res.size() > 1 && std::abs(res.back()) * std::pow(R, double(res.size() - 1)) <= 1e-9 * mx)
            res.pop_back();
        out.eliminant = res;
    }

    const int deg = static_cast<int>(out.eliminant.size()) - 1;
    if (deg != expected)
        throw Error("eliminant degree " + std::to_string(deg) + " differs from d^n = " +
                    std::to_string(expected));

    // Cluster the companion roots into distinct roots with multiplicity.
    auto ys = poly::roots(out.eliminant);
    std::sort(ys.begin(), ys.end(), [](cx a, cx b) {
        return std::pair{a.real(), a.imag()} < std::pair{b.real(), b.imag()};
    });
    std::vector<std::pair<cx, int>> clusters;
    std::vector<bool> used(ys.size(), false);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (used[i]) continue;
        cx sum = ys[i];
        int count = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < ys.size(); ++j) {
            if (!used[j] && std::abs(ys[j] - ys[i]) < 1e-5 * (1.0 + std::abs(ys[i]))) {
                used[j] = true;
                sum += ys[j];
                ++count;
            }
        }
        clusters.push_back({sum / static_cast<double>(count), count});
    }

    for (const auto& [y, mult] : clusters) {
        if (N == 1) {
            out.roots.push_back({polish(f, N, {y, y}), mult});
            out.total_multiplicity += mult;
            continue;
        }
        const Elimination el{f, N};
        const auto [a, b] = el.equations(y);
        const bool a_low = poly::degree(a) <= poly::degree(b);
        const Poly& low = a_low ? a : b;
        const Poly& high = a_low ? b : a;
        if (poly::degree(low) < 1) throw Error("degenerate elimination (vanishing leading term)");

        // Common roots of the two equations. Several distinct points may share
        // the same y (e.g. orbits exchanged by a reversing symmetry); each one
        // is then reported with an equal share of the cluster multiplicity.
        std::vector<std::pair<double, cx>> cand;
        double scale = 0.0;
        for (const auto& c : high) scale = std::max(scale, std::abs(c));
        for (cx x : poly::roots(low)) {
            const double s = scale * std::pow(1.0 + std::abs(x), poly::degree(high));
            cand.push_back({std::abs(poly::eval(high, x)) / s, x});
        }
        std::sort(cand.begin(), cand.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        std::vector<cx> xs{cand.front().second};
        for (std::size_t i = 1; i < cand.size() && static_cast<int>(xs.size()) < mult; ++i) {
            const bool distinct = std::all_of(xs.begin(), xs.end(), [&](cx x) {
                return std::abs(x - cand[i].second) > 1e-5 * (1.0 + std::abs(x));
            });
            if (cand[i].first < 1e-7 && distinct) xs.push_back(cand[i].second);
        }
        const int k = static_cast<int>(xs.size());
        for (int i = 0; i < k; ++i) {
            const int share = mult / k + (i < mult % k ? 1 : 0);
            out.roots.push_back({polish(f, N, {xs[i], y}), share});
            out.total_multiplicity += share;
        }
    }
    std::sort(out.roots.begin(), out.roots.end(),
              [](const OracleRoot& a, const OracleRoot& b) { return lex_less(a.point, b.point); });
    return out;
}

}  // namespace henon
