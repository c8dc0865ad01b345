#include "henon/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "henon/escape.hpp"
#include "henon/poly.hpp"
#include "henon/rng.hpp"

namespace henon {

AffineLine random_line(std::uint64_t rng_seed, double scale)
{
    if (!(scale > 0.0)) throw std::invalid_argument("random_line: scale must be > 0");
    RngStream rng = RngStream(rng_seed).child("line");
    for (;;) {
        const Point2 base = rng.bidisk(scale);
        const Point2 dir = rng.sphere();
        AffineLine l = AffineLine::through(base, dir);
        if (is_generic(l)) return l;
    }
}

std::pair<AffineLine, AffineLine> default_lines(const HenonMap& f, std::uint64_t rng_seed)
{
    const RngStream root(rng_seed);
    return {random_line(root.child("L+").key(), f.radius()), random_line(root.child("L-").key(), f.radius())};
}

nlohmann::json to_json(const AffineLine& l)
{
    return {{"base", point_to_json(l.base)},
            {"dir", point_to_json(l.dir)},
            {"normal_form", {cx_to_json(l.alpha), cx_to_json(l.beta), cx_to_json(l.c)}}};
}

AffineLine line_from_json(const nlohmann::json& j)
{
    return AffineLine::through(point_from_json(j.at("base")), point_from_json(j.at("dir")));
}

cx branch_root(const ElementaryFactor& fac, cx v, cx ref)
{
    if (fac.degree() == 2) {
        const cx b = fac.coeffs[1];
        const cx c = fac.coeffs[0] - v;
        const cx s = std::sqrt(b * b - 4.0 * c);
        const cx r1 = 0.5 * (-b + s);
        const cx r2 = 0.5 * (-b - s);
        return std::abs(r1 - ref) <= std::abs(r2 - ref) ? r1 : r2;
    }
    poly::Poly q(fac.coeffs.begin(), fac.coeffs.end());
    q.push_back(1.0);
    q[0] -= v;
    cx best = ref;
    double dist = std::numeric_limits<double>::infinity();
    for (const cx& r : poly::roots(q)) {
        if (std::abs(r - ref) < dist) {
            dist = std::abs(r - ref);
            best = r;
        }
    }
    return best;
}

std::vector<cx> factor_zeros(const ElementaryFactor& fac)
{
    poly::Poly q(fac.coeffs.begin(), fac.coeffs.end());
    q.push_back(1.0);
    return poly::roots(q);
}

namespace {

std::vector<Point2> nodes_from_sequence(std::span<const cx> u, int steps, int m)
{
    std::vector<Point2> w(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) w[k] = {u[k * m], u[k * m + 1]};
    return w;
}

struct Candidate {
    SampleRoot root;
    bool converged = false;
};

}  // namespace

std::vector<cx> branch_code_sequence(const HenonMap& f, int steps, const AffineLine& start,
                                     const AffineLine& end, std::uint64_t code, int sweeps)
{
    const auto& facs = f.factors();
    const int m = static_cast<int>(facs.size());
    const int E = steps * m;
    std::vector<std::vector<cx>> zeros;
    for (const auto& fac : facs) zeros.push_back(factor_zeros(fac));
    // u_e for e = 1..E inverts elementary step e-1, which uses factor (e-1) mod m
    std::vector<cx> ref(static_cast<std::size_t>(E) + 2);
    for (int e = 1; e <= E; ++e) {
        const auto& z = zeros[(e - 1) % m];
        ref[e] = z[code % z.size()];
        code /= z.size();
    }
    std::vector<cx> u = ref;
    auto close_ends = [&] {
        u[0] = (start.c - start.beta * u[1]) / start.alpha;
        u[E + 1] = (end.c - end.alpha * u[E]) / end.beta;
    };
    close_ends();
    for (int s = 0; s < sweeps; ++s) {
        for (int e = 1; e <= E; ++e) {
            const auto& fac = facs[(e - 1) % m];
            u[e] = branch_root(fac, u[e + 1] + fac.a * u[e - 1], ref[e]);
            if (e == 1) u[0] = (start.c - start.beta * u[1]) / start.alpha;
        }
        close_ends();
    }
    return u;
}

SampleResult sample_mu(const HenonMap& f, int n, const std::pair<AffineLine, AffineLine>& lines,
                       std::int64_t budget, std::uint64_t rng_seed, Execution exec, double support_tol)
{
    if (!(support_tol > 0.0)) throw std::invalid_argument("sample_mu: support_tol must be > 0");
    if (n < 1) throw std::invalid_argument("sample_mu: n must be >= 1");
    if (budget < 1) throw std::invalid_argument("sample_mu: budget must be >= 1");
    const auto& [lplus, lminus] = lines;
    if (!is_generic(lplus) || !is_generic(lminus)) throw std::invalid_argument("sample_mu: lines must be generic");

    const int steps = 2 * n;
    const int m = static_cast<int>(f.factors().size());
    const double R = f.radius();
    const double tol = 1e-12 * std::pow(R, f.d());
    const double expected = std::pow(static_cast<double>(f.d()), steps);
    const auto codes = static_cast<std::int64_t>(std::min<double>(expected, static_cast<double>(budget)));

    const RngStream root = RngStream(rng_seed).child("sampler").child(static_cast<std::uint64_t>(n));
    constexpr int rings = 13;

    std::vector<Candidate> cands(static_cast<std::size_t>(budget));
    for_each_index(cands.size(), exec, [&](std::size_t i) {
        cx t0;
        std::vector<Point2> init;
        if (static_cast<std::int64_t>(i) < codes) {
            const auto u = branch_code_sequence(f, steps, lminus, lplus, i);
            auto w = nodes_from_sequence(u, steps, m);
            t0 = lminus.project(w[0]);
            init.assign(w.begin() + 1, w.end());
        } else {
            RngStream rng = root.child(static_cast<std::uint64_t>(i));
            const int ring = static_cast<int>(i % rings);
            const double r = std::pow(10.0, -3.0 + 6.0 * ring / (rings - 1));
            t0 = std::polar(r, 2.0 * std::numbers::pi * rng.uniform());
            Point2 z = lminus.at(t0);
            for (int k = 0; k < steps; ++k) {
                bool inside = max_norm(z) < R;
                if (inside) {
                    z = evaluate(f, z);
                    inside = max_norm(z) < R;
                }
                if (!inside) z = rng.bidisk(R);
                init.push_back(z);
            }
        }
        try {
            const auto o = solve_line_orbit(f, lminus, lplus, t0, init, tol);
            cands[i].root = {o.t, o.nodes[n], o.nodes.front(), o.nodes.back(), o.residual};
            cands[i].converged = true;
        } catch (const NoConvergence&) {
        } catch (const OverflowError&) {
        }
    });

    SampleResult out;
    auto& diag = out.diagnostics;
    diag.attempted = budget;
    diag.expected = expected;
    std::vector<SampleRoot> sols;
    for (auto& c : cands) {
        if (!c.converged) continue;
        ++diag.converged;
        sols.push_back(c.root);
    }
    cands = {};
    std::sort(sols.begin(), sols.end(),
              [](const SampleRoot& a, const SampleRoot& b) { return lex_less(a.point, b.point); });

    for (const auto& r : sols) {
        const Point2& p = r.point;
        bool dup = false;
        for (std::size_t c = out.roots.size(); c-- > 0;) {
            const Point2& q = out.roots[c].point;
            if (q.x.real() < p.x.real() - kSampleDedupRadius) break;
            if (distance(p, q) < kSampleDedupRadius) {
                dup = true;
                break;
            }
        }
        if (dup)
            ++diag.duplicates;
        else
            out.roots.push_back(r);
    }
    sols = {};

    diag.roots = static_cast<std::int64_t>(out.roots.size());
    for_each_index(out.roots.size(), exec, [&](std::size_t k) {
        SampleRoot& r = out.roots[k];
        try {
            r.g_plus = green(f, r.point, Direction::forward, 1e-10, kSupportDepth).value;
            r.g_minus = green(f, r.point, Direction::backward, 1e-10, kSupportDepth).value;
            r.verified = r.g_plus < support_tol && r.g_minus < support_tol;
        } catch (const MaxDepthExceeded&) {
            r.g_plus = r.g_minus = std::numeric_limits<double>::infinity();
        }
    });

    std::vector<Point2> points;
    for (const auto& r : out.roots) {
        if (r.verified)
            points.push_back(r.point);
        else
            ++diag.rejected_not_in_k;
    }
    diag.found = static_cast<std::int64_t>(points.size());
    diag.root_deficit = std::max(0.0, 1.0 - static_cast<double>(diag.found) / expected);
    if (diag.found < expected)
        diag.warnings.push_back("RootDeficit: " + std::to_string(diag.found) + " verified of d^(2n) = " +
                                std::to_string(static_cast<long long>(expected)) + " (" +
                                std::to_string(diag.roots) + " roots found)");
    if (points.empty()) diag.warnings.push_back("no root passed the support check");

    nlohmann::json prov = {{"method", "line-intersection"},
                           {"n", n},
                           {"lines", {{"plus", to_json(lplus)}, {"minus", to_json(lminus)}}},
                           {"budget", budget},
                           {"root_deficit", diag.root_deficit}};
    if (!points.empty()) out.measure = EmpiricalMeasure::uniform(std::move(points), std::move(prov));
    else out.measure.provenance = std::move(prov);
    return out;
}

}  // namespace henon
