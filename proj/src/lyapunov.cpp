#include "henon/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "henon/escape.hpp"
#include "henon/rng.hpp"
#include "henon/sampler.hpp"

namespace henon {

namespace {

constexpr double kOrbitTol = 1e-9;
constexpr int kMaxSweeps = 400;

cx dot(const Point2& u, const Point2& v) { return std::conj(u.x) * v.x + std::conj(u.y) * v.y; }

Point2 complement(const Point2& q) { return {-std::conj(q.y), std::conj(q.x)}; }

double step_defect(const HenonMap& f, const Point2& from, const Point2& to, Direction dir)
{
    return distance(step(f, from, dir), to) / (1.0 + max_norm(to));
}

}  // namespace

LyapunovEstimate exponents_along(const HenonMap& f, std::span<const Point2> nodes, int warmup, Direction dir,
                                 const Point2& frame)
{
    if (warmup < 0) throw std::invalid_argument("exponents_along: warmup must be >= 0");
    if (nodes.size() < static_cast<std::size_t>(warmup) + 2)
        throw std::invalid_argument("exponents_along: need at least one step after the warm-up");
    const double len = norm2(frame);
    if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument("exponents_along: bad initial frame");

    Point2 q1 = cx{1.0 / len} * frame;
    Point2 q2 = complement(q1);
    double s1 = 0.0, s2 = 0.0;
    Point2 first = q1;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        if (!(step_defect(f, nodes[k], nodes[k + 1], dir) < kOrbitTol))
            throw std::invalid_argument("exponents_along: nodes are not an orbit");
        const Mat2 J = dir == Direction::forward ? jacobian(f, nodes[k]) : jacobian_inverse(f, nodes[k]);
        const Point2 v1 = J * q1;
        const Point2 v2 = J * q2;
        const double r11 = norm2(v1);
        q1 = cx{1.0 / r11} * v1;
        q2 = complement(q1);
        // Gram-Schmidt: the second column keeps only its component along q2
        const double r22 = std::abs(dot(q2, v2));
        if (static_cast<int>(k) + 1 == warmup) first = q1;
        if (static_cast<int>(k) >= warmup) {
            s1 += std::log(r11);
            s2 += std::log(r22);
        }
    }
    LyapunovEstimate e;
    e.horizon = static_cast<int>(nodes.size()) - 1 - warmup;
    e.lambda1 = s1 / e.horizon;
    e.lambda2 = s2 / e.horizon;
    e.start = nodes[warmup];
    e.frame_start = first;
    e.frame_end = q1;
    return e;
}

LyapunovEstimate finite_time_exponents(const HenonMap& f, const Point2& z, int horizon, const Point2& frame)
{
    if (horizon < 1) throw std::invalid_argument("finite_time_exponents: horizon must be >= 1");
    const double R = f.radius();
    const auto fwd = iterate_orbit(f, z, horizon, Direction::forward, R);
    if (fwd.escaped_at)
        throw OrbitEscaped("finite_time_exponents: orbit escapes at step " + std::to_string(*fwd.escaped_at));
    const auto bwd = iterate_orbit(f, z, kFrameWarmup, Direction::backward, R);
    std::vector<Point2> nodes(bwd.points.rbegin(), bwd.points.rend());
    nodes.insert(nodes.end(), fwd.points.begin() + 1, fwd.points.end());
    return exponents_along(f, nodes, static_cast<int>(bwd.points.size()) - 1, Direction::forward, frame);
}

LyapunovEstimate periodic_exponents(const HenonMap& f, std::span<const Point2> cycle, int horizon,
                                    const Point2& frame)
{
    if (cycle.empty()) throw std::invalid_argument("periodic_exponents: empty cycle");
    if (horizon < 1) throw std::invalid_argument("periodic_exponents: horizon must be >= 1");
    const int n = static_cast<int>(cycle.size());
    const int warmup = n * ((kFrameWarmup + n - 1) / n);
    std::vector<Point2> nodes(static_cast<std::size_t>(warmup + horizon) + 1);
    for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = cycle[k % n];
    return exponents_along(f, nodes, warmup, Direction::forward, frame);
}

ShadowOrbit shadow_orbit(const HenonMap& f, const Point2& z, int before, int after, std::uint64_t rng_seed)
{
    if (before < 0 || after < 1) throw std::invalid_argument("shadow_orbit: need before >= 0 and after >= 1");
    const auto& facs = f.factors();
    const int m = static_cast<int>(facs.size());
    const int E = (before + after) * m;
    const double R = f.radius();

    std::vector<std::vector<cx>> zeros;
    for (const auto& fac : facs) zeros.push_back(factor_zeros(fac));

    // elementary sequence: node k is (u[k m], u[k m + 1]); step e maps
    // (u_e, u_{e+1}) to (u_{e+1}, p_j(u_{e+1}) - a_j u_e) with j = e mod m
    std::vector<cx> u(static_cast<std::size_t>(E) + 2);
    std::vector<char> known(u.size(), 0);
    const int e0 = before * m;
    u[e0] = z.x;
    u[e0 + 1] = z.y;
    known[e0] = known[e0 + 1] = 1;
    for (int e = e0; e + 2 <= E + 1; ++e) {
        const auto& fac = facs[e % m];
        const cx next = fac.p(u[e + 1]) - fac.a * u[e];
        if (!(std::max(std::abs(next), std::abs(u[e + 1])) < R)) break;
        u[e + 2] = next;
        known[e + 2] = 1;
    }
    for (int e = e0; e - 1 >= 0; --e) {
        const auto& fac = facs[(e - 1 + m) % m];
        const cx prev = (fac.p(u[e]) - u[e + 1]) / fac.a;
        if (!(std::max(std::abs(prev), std::abs(u[e])) < R)) break;
        u[e - 1] = prev;
        known[e - 1] = 1;
    }

    RngStream rng = RngStream(rng_seed).child("shadow");
    std::vector<cx> ref(u.size());
    for (int e = 0; e <= E + 1; ++e) {
        const auto& zs = zeros[((e - 1) % m + m) % m];
        if (known[e]) {
            ref[e] = *std::min_element(zs.begin(), zs.end(),
                                       [&](cx a, cx b) { return std::abs(a - u[e]) < std::abs(b - u[e]); });
        } else {
            ref[e] = zs[rng.index(zs.size())];
            u[e] = ref[e];
        }
    }

    auto relax = [&](int e) {
        const auto& fac = facs[(e - 1) % m];
        const cx v = branch_root(fac, u[e + 1] + fac.a * u[e - 1], ref[e]);
        const double change = std::abs(v - u[e]);
        u[e] = v;
        return change;
    };
    bool settled = false;
    for (int s = 0; s < kMaxSweeps && !settled; ++s) {
        double change = 0.0;
        for (int e = 1; e <= E; ++e) change = std::max(change, relax(e));
        for (int e = E; e >= 1; --e) change = std::max(change, relax(e));
        if (!std::isfinite(change)) break;
        settled = change <= 1e-14 * R;
    }
    if (!settled) throw NoConvergence("shadow_orbit: branch iteration does not contract");

    ShadowOrbit out;
    out.before = before;
    out.nodes.resize(static_cast<std::size_t>(before + after) + 1);
    for (int k = 0; k <= before + after; ++k) out.nodes[k] = {u[k * m], u[k * m + 1]};
    for (std::size_t k = 0; k + 1 < out.nodes.size(); ++k)
        out.residual = std::max(out.residual, step_defect(f, out.nodes[k], out.nodes[k + 1], Direction::forward));
    if (!(out.residual < kOrbitTol)) throw NoConvergence("shadow_orbit: residual too large");
    out.distance = distance(out.nodes[before], z);
    return out;
}

LyapunovEstimate shadow_exponents(const HenonMap& f, const Point2& z, int horizon, std::uint64_t rng_seed,
                                  const Point2& frame)
{
    if (horizon < 1) throw std::invalid_argument("shadow_exponents: horizon must be >= 1");
    const auto s = shadow_orbit(f, z, kFrameWarmup, horizon, rng_seed);
    auto e = exponents_along(f, s.nodes, kFrameWarmup, Direction::forward, frame);
    e.shadow_distance = s.distance;
    return e;
}

std::vector<LyapunovRecord> batch_exponents(const HenonMap& f, std::span<const Point2> points, int horizon,
                                            bool shadow, std::uint64_t rng_seed, Execution exec)
{
    if (horizon < 1) throw std::invalid_argument("batch_exponents: horizon must be >= 1");
    const RngStream root = RngStream(rng_seed).child("lyapunov");
    std::vector<LyapunovRecord> out(points.size());
    for_each_index(points.size(), exec, [&](std::size_t i) {
        auto& r = out[i];
        r.point = points[i];
        try {
            r.estimate = finite_time_exponents(f, points[i], horizon);
        } catch (const OrbitEscaped& e) {
            r.error = e.what();
        }
        if (r.estimate || !shadow) return;
        try {
            r.estimate = shadow_exponents(f, points[i], horizon, root.child(static_cast<std::uint64_t>(i)).key());
            r.error.clear();
        } catch (const NoConvergence& e) {
            r.error = e.what();
        }
    });
    return out;
}

LyapunovSummary summarize(const HenonMap& f, std::span<const LyapunovRecord> records, double buffer)
{
    LyapunovSummary s;
    const double half = 0.5 * std::log(static_cast<double>(f.d()));
    const double log_det = std::log(std::abs(f.jacobian_det()));
    std::int64_t up = 0, down = 0;
    for (const auto& r : records) {
        if (!r.estimate) {
            ++s.failed;
            continue;
        }
        const auto& e = *r.estimate;
        ++s.count;
        s.mean1 += e.lambda1;
        s.mean2 += e.lambda2;
        up += e.lambda1 >= half - buffer;
        down += e.lambda2 <= -half + buffer;
        s.sum_law_error = std::max(s.sum_law_error, std::abs(e.lambda1 + e.lambda2 - log_det));
    }
    if (s.count > 0) {
        s.mean1 /= static_cast<double>(s.count);
        s.mean2 /= static_cast<double>(s.count);
        s.frac_expanding = static_cast<double>(up) / static_cast<double>(s.count);
        s.frac_contracting = static_cast<double>(down) / static_cast<double>(s.count);
    }
    return s;
}

nlohmann::json to_json(const LyapunovEstimate& e)
{
    return {{"lambda1", e.lambda1},
            {"lambda2", e.lambda2},
            {"horizon", e.horizon},
            {"start", point_to_json(e.start)},
            {"shadow_distance", e.shadow_distance}};
}

nlohmann::json to_json(const LyapunovRecord& r)
{
    nlohmann::json j = {{"point", point_to_json(r.point)}};
    if (r.estimate)
        j["estimate"] = to_json(*r.estimate);
    else
        j["error"] = r.error;
    return j;
}

nlohmann::json to_json(const LyapunovSummary& s)
{
    return {{"count", s.count},
            {"failed", s.failed},
            {"mean_lambda1", s.mean1},
            {"mean_lambda2", s.mean2},
            {"frac_expanding", s.frac_expanding},
            {"frac_contracting", s.frac_contracting},
            {"sum_law_error", s.sum_law_error}};
}

}  // namespace henon
