#include "henon/bvp.hpp"

#include <algorithm>
#include <cmath>

#include "henon/spectral.hpp"

namespace henon {

AffineLine AffineLine::through(const Point2& base, const Point2& dir)
{
    const double n = norm2(dir);
    if (!(n > 0.0)) throw std::invalid_argument("line direction must be nonzero");
    AffineLine l;
    l.base = base;
    l.dir = cx{1.0 / n} * dir;
    // (alpha, beta) orthogonal to dir in the bilinear sense: alpha dx + beta dy = 0
    l.alpha = l.dir.y;
    l.beta = -l.dir.x;
    const double m = std::sqrt(std::norm(l.alpha) + std::norm(l.beta));
    l.alpha /= m;
    l.beta /= m;
    l.c = l.alpha * base.x + l.beta * base.y;
    return l;
}

cx AffineLine::project(const Point2& z) const
{
    const Point2 v = z - base;
    return std::conj(dir.x) * v.x + std::conj(dir.y) * v.y;
}

bool is_generic(const AffineLine& line)
{
    return principal_angle(line.dir, {1.0, 0.0}) > kAxisMargin &&
           principal_angle(line.dir, {0.0, 1.0}) > kAxisMargin;
}

BandedLU::BandedLU(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1), ab_(static_cast<std::size_t>(n) * ld_), piv_(n)
{
}

cx& BandedLU::at(int i, int j) { return ab(i, j); }

bool BandedLU::factor()
{
    for (int j = 0; j < n_; ++j) {
        const int km = std::min(kl_, n_ - 1 - j);
        int p = j;
        double best = std::abs(ab(j, j));
        for (int i = j + 1; i <= j + km; ++i) {
            if (std::abs(ab(i, j)) > best) {
                best = std::abs(ab(i, j));
                p = i;
            }
        }
        piv_[j] = p;
        if (best == 0.0) return false;
        const int last = std::min(n_ - 1, j + ku_ + kl_);
        if (p != j)
            for (int c = j; c <= last; ++c) std::swap(ab(j, c), ab(p, c));
        const cx pivot = ab(j, j);
        for (int i = j + 1; i <= j + km; ++i) {
            const cx l = ab(i, j) / pivot;
            ab(i, j) = l;
            if (l == cx{0.0}) continue;
            for (int c = j + 1; c <= last; ++c) ab(i, c) -= l * ab(j, c);
        }
    }
    return true;
}

void BandedLU::solve(std::span<cx> b) const
{
    for (int j = 0; j < n_; ++j) {
        if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
        const int km = std::min(kl_, n_ - 1 - j);
        for (int i = j + 1; i <= j + km; ++i) b[i] -= ab(i, j) * b[j];
    }
    for (int j = n_ - 1; j >= 0; --j) {
        b[j] /= ab(j, j);
        for (int i = std::max(0, j - ku_ - kl_); i < j; ++i) b[i] -= ab(i, j) * b[j];
    }
}

namespace {

// Residual vector [G_0, G_1, ..., G_{N-1}, end defect], max-norm returned.
bool line_residual(const HenonMap& f, const AffineLine& start, const AffineLine& end, cx t,
                   std::span<const Point2> w, std::vector<cx>& res, double& norm)
{
    const int N = static_cast<int>(w.size()) - 1;
    res.assign(static_cast<std::size_t>(2 * N + 1), 0.0);
    norm = 0.0;
    try {
        for (int k = 0; k < N; ++k) {
            const Point2 src = k == 0 ? start.at(t) : w[k];
            const Point2 g = evaluate(f, src) - w[k + 1];
            res[2 * k] = g.x;
            res[2 * k + 1] = g.y;
            norm = std::max(norm, max_norm(g));
        }
    } catch (const OverflowError&) {
        return false;
    }
    res[2 * N] = end.defect(w[N]);
    norm = std::max(norm, std::abs(res[2 * N]));
    return std::isfinite(norm);
}

}  // namespace

LineOrbit solve_line_orbit(const HenonMap& f, const AffineLine& start, const AffineLine& end, cx t0,
                           std::span<const Point2> initial, double tol, int max_iter)
{
    const int N = static_cast<int>(initial.size());
    if (N < 1) throw std::invalid_argument("solve_line_orbit: need at least one step");
    const double blowup = 1e3 * f.radius();

    LineOrbit cur;
    cur.t = t0;
    cur.nodes.resize(static_cast<std::size_t>(N) + 1);
    cur.nodes[0] = start.at(t0);
    std::copy(initial.begin(), initial.end(), cur.nodes.begin() + 1);

    std::vector<cx> res;
    double r = 0.0;
    if (!line_residual(f, start, end, cur.t, cur.nodes, res, r)) throw NoConvergence("initial guess overflows");

    const int m = 2 * N + 1;
    std::vector<cx> rhs(static_cast<std::size_t>(m));
    std::vector<Point2> trial(cur.nodes.size());
    std::vector<cx> trial_res;
    int polish = 0;
    for (int it = 0; it < max_iter; ++it) {
        if (r == 0.0 || (r <= tol && polish >= 1)) break;
        // unknowns: t (col 0), w_k (cols 2k-1, 2k) for k = 1..N
        BandedLU lu(m, 2, 2);
        const Mat2 j0 = jacobian(f, start.at(cur.t));
        const Point2 dt = j0 * start.dir;
        lu.at(0, 0) = dt.x;
        lu.at(1, 0) = dt.y;
        lu.at(0, 1) = -1.0;
        lu.at(1, 2) = -1.0;
        for (int k = 1; k < N; ++k) {
            const Mat2 jk = jacobian(f, cur.nodes[k]);
            const int r0 = 2 * k, c0 = 2 * k - 1;
            lu.at(r0, c0) = jk.a;
            lu.at(r0, c0 + 1) = jk.b;
            lu.at(r0 + 1, c0) = jk.c;
            lu.at(r0 + 1, c0 + 1) = jk.d;
            lu.at(r0, c0 + 2) = -1.0;
            lu.at(r0 + 1, c0 + 3) = -1.0;
        }
        lu.at(2 * N, 2 * N - 1) = end.alpha;
        lu.at(2 * N, 2 * N) = end.beta;
        if (!lu.factor()) throw NoConvergence("singular boundary Jacobian");
        for (int i = 0; i < m; ++i) rhs[i] = -res[i];
        lu.solve(rhs);

        double lambda = 1.0;
        double tr = 0.0;
        bool accepted = false;
        cx trial_t{};
        for (int bt = 0; bt < 10; ++bt, lambda *= 0.5) {
            trial_t = cur.t + lambda * rhs[0];
            trial[0] = start.at(trial_t);
            bool bounded = max_norm(trial[0]) < blowup;
            for (int k = 1; k <= N; ++k) {
                trial[k] = cur.nodes[k] + cx{lambda} * Point2{rhs[2 * k - 1], rhs[2 * k]};
                bounded = bounded && max_norm(trial[k]) < blowup;
            }
            if (bounded && line_residual(f, start, end, trial_t, trial, trial_res, tr) && tr < r) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (r <= tol) break;
            throw NoConvergence("no descent step");
        }
        cur.t = trial_t;
        cur.nodes.swap(trial);
        res.swap(trial_res);
        r = tr;
        cur.iterations = it + 1;
        if (r <= tol) ++polish;
    }
    if (!(r <= tol)) throw NoConvergence("boundary problem did not converge");
    cur.residual = r;
    return cur;
}

}  // namespace henon
