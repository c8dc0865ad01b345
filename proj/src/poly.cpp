#include "henon/poly.hpp"

#include <algorithm>
#include <numbers>

#include <Eigen/Dense>

namespace henon::poly {

cx eval(std::span<const cx> p, cx t)
{
    cx acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + *it;
    return acc;
}

Poly derivative(std::span<const cx> p)
{
    if (p.size() <= 1) return {0.0};
    Poly out(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) out[i - 1] = static_cast<double>(i) * p[i];
    return out;
}

Poly add(std::span<const cx> p, std::span<const cx> q)
{
    Poly out(std::max(p.size(), q.size()));
    for (std::size_t i = 0; i < p.size(); ++i) out[i] += p[i];
    for (std::size_t i = 0; i < q.size(); ++i) out[i] += q[i];
    return out;
}

Poly scale(std::span<const cx> p, cx s)
{
    Poly out(p.begin(), p.end());
    for (auto& c : out) c *= s;
    return out;
}

Poly mul(std::span<const cx> p, std::span<const cx> q)
{
    if (p.empty() || q.empty()) return {};
    Poly out(p.size() + q.size() - 1);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
    return out;
}

Poly compose(std::span<const cx> p, std::span<const cx> q)
{
    Poly acc{0.0};
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        acc = mul(acc, q);
        if (acc.empty()) acc = {0.0};
        acc[0] += *it;
    }
    return acc;
}

Poly trim(Poly p, double rel)
{
    double mx = 0.0;
    for (const auto& c : p) mx = std::max(mx, std::abs(c));
    while (p.size() > 1 && std::abs(p.back()) <= rel * mx) p.pop_back();
    return p;
}

int degree(std::span<const cx> p)
{
    int d = static_cast<int>(p.size()) - 1;
    while (d > 0 && p[d] == cx{0.0}) --d;
    return d;
}

cx resultant(std::span<const cx> p, std::span<const cx> q)
{
    const int m = degree(p);
    const int n = degree(q);
    if (m == 0) return std::pow(p[0], n);
    if (n == 0) return std::pow(q[0], m);
    const int size = m + n;
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(size, size);
    // rows 0..n-1 hold shifted copies of p (highest degree first), rows n.. of q
    for (int r = 0; r < n; ++r)
        for (int k = 0; k <= m; ++k) s(r, r + k) = p[m - k];
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= n; ++k) s(n + r, r + k) = q[n - k];
    return s.partialPivLu().determinant();
}

std::vector<cx> roots(std::span<const cx> p_in)
{
    Poly p = trim(Poly(p_in.begin(), p_in.end()));
    const int d = static_cast<int>(p.size()) - 1;
    if (d < 1) return {};
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) c(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) c(i, d - 1) = -p[i] / p[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c, false);
    const Poly dp = derivative(p);
    std::vector<cx> out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        cx t = es.eigenvalues()[i];
        for (int it = 0; it < 3; ++it) {
            const cx v = eval(p, t);
            const cx s = eval(dp, t);
            if (std::abs(s) == 0.0) break;
            const cx nt = t - v / s;
            // stop once Newton no longer improves; multiple roots stay where they are
            if (std::abs(eval(p, nt)) >= std::abs(v)) break;
            t = nt;
        }
        out[i] = t;
    }
    return out;
}

Poly interpolate_on_circle(std::span<const cx> values, double radius)
{
    const std::size_t k = values.size();
    Poly out(k);
    for (std::size_t j = 0; j < k; ++j) {
        cx acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((i * j) % k) / static_cast<double>(k);
            acc += values[i] * std::polar(1.0, ang);
        }
        out[j] = acc / (static_cast<double>(k) * std::pow(radius, static_cast<double>(j)));
    }
    return out;
}

}  // namespace henon::poly
