#include "henon/census.hpp"

#include <algorithm>
#include <cmath>

#include "henon/escape.hpp"
#include "henon/rng.hpp"

namespace henon {

const char* to_string(PointClass c)
{
    switch (c) {
    case PointClass::attracting: return "attracting";
    case PointClass::repelling: return "repelling";
    case PointClass::saddle: return "saddle";
    case PointClass::saddle_eps: return "saddle_eps";
    case PointClass::indeterminate: return "indeterminate";
    }
    return "?";
}

PointClass point_class_from_string(const std::string& s)
{
    for (auto c : {PointClass::attracting, PointClass::repelling, PointClass::saddle,
                   PointClass::saddle_eps, PointClass::indeterminate})
        if (s == to_string(c)) return c;
    throw ParseError("unknown classification '" + s + "'");
}

double cyclic_residual(const HenonMap& f, std::span<const Point2> orbit)
{
    const std::size_t n = orbit.size();
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        r = std::max(r, max_norm(evaluate(f, orbit[i]) - orbit[(i + 1) % n]));
    return r;
}

namespace {

struct Step {
    std::vector<Point2> delta;
    double relative_singularity;
};

// Solve (I - M) d0 = b with the 2x2 closed form.
Point2 solve_cycle(const Mat2& m, const Point2& b, double& rel_sing)
{
    const Mat2 s{1.0 - m.a, -m.b, -m.c, 1.0 - m.d};
    const cx det = s.det();
    const double scale = 1.0 + m.max_abs();
    rel_sing = std::abs(det) / (scale * scale);
    if (rel_sing < 1e-15 || !std::isfinite(rel_sing)) throw SingularJacobian("singular cycle matrix");
    return {(s.d * b.x - s.b * b.y) / det, (-s.c * b.x + s.a * b.y) / det};
}

Step newton_step(const HenonMap& f, std::span<const Point2> z, std::span<const Point2> residual)
{
    const std::size_t n = z.size();
    std::vector<Mat2> jac(n);
    Mat2 m = Mat2::identity();
    Point2 b{};
    for (std::size_t i = 0; i < n; ++i) {
        jac[i] = jacobian(f, z[i]);
        m = jac[i] * m;
        b = jac[i] * b + residual[i];
    }
    Step st;
    st.delta.resize(n);
    st.delta[0] = solve_cycle(m, b, st.relative_singularity);
    for (std::size_t i = 0; i + 1 < n; ++i) st.delta[i + 1] = jac[i] * st.delta[i] + residual[i];
    return st;
}

bool residuals(const HenonMap& f, std::span<const Point2> z, std::vector<Point2>& out, double& norm)
{
    const std::size_t n = z.size();
    out.resize(n);
    norm = 0.0;
    try {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = evaluate(f, z[i]) - z[(i + 1) % n];
            norm = std::max(norm, max_norm(out[i]));
        }
    } catch (const OverflowError&) {
        return false;
    }
    return std::isfinite(norm);
}

}  // namespace

RefineResult newton_orbit_refine(const HenonMap& f, std::span<const Point2> orbit, double tol,
                                 int max_iter)
{
    if (orbit.empty()) throw std::invalid_argument("newton_orbit_refine: empty orbit");
    const double R = f.radius();
    const double blowup = 1e3 * R;
    const double floor = 1e-13 * R;

    RefineResult res;
    res.orbit.assign(orbit.begin(), orbit.end());
    std::vector<Point2> F;
    double r = 0.0;
    if (!residuals(f, res.orbit, F, r)) throw NoConvergence("seed orbit overflows");
    res.residual_history.push_back(r);

    std::vector<Point2> trial(orbit.size());
    std::vector<Point2> trial_F;
    int polish = 0;
    for (int it = 0; it < max_iter; ++it) {
        if (r == 0.0) break;
        if (r <= tol && polish >= 1) break;
        Step st = newton_step(f, res.orbit, F);
        res.relative_singularity = st.relative_singularity;

        double lambda = 1.0;
        double tr = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 12; ++bt, lambda *= 0.5) {
            bool bounded = true;
            for (std::size_t i = 0; i < trial.size(); ++i) {
                trial[i] = res.orbit[i] + cx{lambda} * st.delta[i];
                if (!(max_norm(trial[i]) < blowup)) bounded = false;
            }
            if (bounded && residuals(f, trial, trial_F, tr) && tr < r) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (r <= tol) break;  // at the rounding floor
            throw NoConvergence("no descent step");
        }
        res.orbit.swap(trial);
        F.swap(trial_F);
        r = tr;
        res.residual_history.push_back(r);
        res.iterations = it + 1;
        if (r <= tol) ++polish;
    }
    res.residual = r;
    if (!(r <= tol)) throw NoConvergence("max_iter reached");

    // Quadratic tail: r_k <= C r_{k-1}^2 unless already at the rounding floor.
    const auto& h = res.residual_history;
    if (h.size() >= 2) {
        const double prev = h[h.size() - 2];
        const double last = h.back();
        if (last > floor && last > 1e4 * prev * prev) {
            if (res.relative_singularity < kSingularTol)
                throw SingularJacobian("linear convergence at a near-singular solution");
            throw NoConvergence("convergence is not quadratic");
        }
    }
    return res;
}

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base)
{
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

Point2 halton_bidisk(std::uint64_t i, double radius)
{
    constexpr double two_pi = 6.283185307179586;
    const double r1 = radius * std::sqrt(radical_inverse(i, 2));
    const double t1 = two_pi * radical_inverse(i, 3);
    const double r2 = radius * std::sqrt(radical_inverse(i, 5));
    const double t2 = two_pi * radical_inverse(i, 7);
    return {std::polar(r1, t1), std::polar(r2, t2)};
}

}  // namespace

std::vector<Point2> census_seed_orbit(const HenonMap& f, int n, std::int64_t index,
                                      std::int64_t seeds, std::uint64_t rng_seed)
{
    (void)seeds;
    const double R = f.radius();
    RngStream rng = RngStream(rng_seed).child("census").child(static_cast<std::uint64_t>(n)).child(
        static_cast<std::uint64_t>(index));
    std::vector<Point2> orbit(static_cast<std::size_t>(n));
    switch (index % 4) {
    case 0: {
        // constant orbit at a low-discrepancy point; the Halton offset depends on the seed
        const Point2 z = halton_bidisk(static_cast<std::uint64_t>(index / 4) + 1 + (rng_seed % 4096), R);
        std::fill(orbit.begin(), orbit.end(), z);
        return orbit;
    }
    case 1: {
        // a forward orbit that stays in the bidisk for n steps, if one is found quickly
        for (int attempt = 0; attempt < 64; ++attempt) {
            Point2 z = rng.bidisk(R);
            bool ok = true;
            for (int i = 0; i < n && ok; ++i) {
                orbit[i] = z;
                z = evaluate(f, z);
                ok = max_norm(z) <= R;
            }
            if (ok) return orbit;
        }
        [[fallthrough]];
    }
    default:
        for (auto& z : orbit) z = rng.bidisk(R);
        return orbit;
    }
}

namespace {

struct Candidate {
    std::vector<Point2> orbit;  // rotated so that orbit[0] is the candidate point
    bool singular = false;
};

std::vector<Point2> rotate(const std::vector<Point2>& orbit, std::size_t k)
{
    std::vector<Point2> out(orbit.size());
    for (std::size_t i = 0; i < orbit.size(); ++i) out[i] = orbit[(i + k) % orbit.size()];
    return out;
}

}  // namespace

CensusResult census(const HenonMap& f, int n, std::int64_t seeds, std::uint64_t rng_seed, double tol,
                    Execution exec)
{
    if (n < 1) throw std::invalid_argument("census: n must be >= 1");
    if (seeds < 1) throw std::invalid_argument("census: seeds must be >= 1");
    const double expected = std::pow(static_cast<double>(f.d()), n);

    CensusResult out;
    auto& diag = out.diagnostics;
    diag.attempted = seeds;
    if (static_cast<double>(seeds) < expected)
        diag.warnings.push_back("seeds below d^n");

    struct TaskResult {
        std::optional<RefineResult> refined;
        bool singular = false;
    };
    std::vector<TaskResult> results(static_cast<std::size_t>(seeds));
    for_each_index(results.size(), exec, [&](std::size_t i) {
        const auto seed = census_seed_orbit(f, n, static_cast<std::int64_t>(i), seeds, rng_seed);
        try {
            results[i].refined = newton_orbit_refine(f, seed, tol);
        } catch (const SingularJacobian&) {
            results[i].singular = true;
        } catch (const NoConvergence&) {
        } catch (const OverflowError&) {
        }
    });

    // Deterministic single-threaded reduction.
    std::vector<Candidate> cands;
    for (const auto& r : results) {
        if (r.singular) ++diag.singular;
        if (!r.refined) {
            if (!r.singular) ++diag.no_convergence;
            continue;
        }
        ++diag.converged;
        const bool sing = r.refined->relative_singularity < kSingularTol;
        for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k)
            cands.push_back({rotate(r.refined->orbit, k), sing});
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return lex_less(a.orbit[0], b.orbit[0]); });

    // Greedy clustering in the sorted order; a cluster is keyed by its first member.
    struct Cluster {
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const Point2& p = cands[i].orbit[0];
        bool placed = false;
        for (std::size_t c = clusters.size(); c-- > 0;) {
            const Point2& q = cands[clusters[c].members.front()].orbit[0];
            if (q.x.real() < p.x.real() - kDedupRadius) break;
            if (distance(p, q) < kDedupRadius) {
                clusters[c].members.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({{i}});
    }

    for (const auto& cl : clusters) {
        std::vector<Point2> centroid(static_cast<std::size_t>(n));
        bool singular = false;
        for (auto m : cl.members) {
            singular = singular || cands[m].singular;
            for (int k = 0; k < n; ++k) centroid[k] = centroid[k] + cands[m].orbit[k];
        }
        const cx inv{1.0 / static_cast<double>(cl.members.size())};
        for (auto& z : centroid) z = inv * z;
        PeriodicRecord rec;
        rec.n = n;
        rec.multiplicity_flag = singular;
        try {
            auto refined = newton_orbit_refine(f, centroid, tol);
            rec.orbit = std::move(refined.orbit);
            rec.multiplicity_flag = rec.multiplicity_flag || refined.relative_singularity < kSingularTol;
        } catch (const Error&) {
            // keep the best member if the centroid does not re-refine
            rec.orbit = cands[cl.members.front()].orbit;
            rec.multiplicity_flag = true;
        }
        rec.point = rec.orbit.front();
        rec.residual = cyclic_residual(f, rec.orbit);
        if (!(rec.residual <= tol)) continue;
        out.records.push_back(std::move(rec));
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const PeriodicRecord& a, const PeriodicRecord& b) { return lex_less(a.point, b.point); });
    out.records = exact_period_filter(std::move(out.records));
    diag.deduped = static_cast<std::int64_t>(out.records.size());
    if (static_cast<double>(out.records.size()) < expected)
        diag.warnings.push_back("SeedBudgetExhausted: found " + std::to_string(out.records.size()) +
                                " of d^n = " + std::to_string(static_cast<long long>(expected)));
    return out;
}

std::vector<PeriodicRecord> exact_period_filter(std::vector<PeriodicRecord> records, double tol)
{
    for (auto& rec : records) {
        const int n = rec.n;
        rec.exact_period = n;
        if (static_cast<int>(rec.orbit.size()) != n) throw std::invalid_argument("exact_period_filter: record without its orbit");
        for (int m = 1; m < n; ++m) {
            if (n % m != 0) continue;
            if (distance(rec.orbit[m], rec.orbit[0]) < tol) {
                rec.exact_period = m;
                break;
            }
        }
    }
    return records;
}

}  // namespace henon
