#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "henon/escape.hpp"
#include "henon/poly.hpp"
#include "henon/rng.hpp"
#include "henon/sampler.hpp"

using namespace henon;

namespace {

double hausdorff(const std::vector<Point2>& a, const std::vector<Point2>& b)
{
    auto one_sided = [](const std::vector<Point2>& p, const std::vector<Point2>& q) {
        double worst = 0.0;
        for (const auto& z : p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& w : q) best = std::min(best, distance(z, w));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

std::vector<Point2> sample_points(const SampleResult& r, int n)
{
    std::vector<Point2> p;
    for (const auto& s : r.roots) p.push_back(s.point);
    return p;
}

}  // namespace

TEST_CASE("random lines")
{
    const auto a = random_line(5, 3.0);
    const auto b = random_line(5, 3.0);
    CHECK(a.base == b.base);
    CHECK(a.dir == b.dir);
    const auto c = random_line(6, 3.0);
    CHECK_FALSE(a.base == c.base);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto l = random_line(s, 2.0);
        CHECK(is_generic(l));
        CHECK(max_norm(l.base) <= 2.0);
        CHECK(norm2(l.dir) == doctest::Approx(1.0));
        CHECK(std::abs(l.alpha * l.dir.x + l.beta * l.dir.y) < 1e-15);
        CHECK(std::abs(l.defect(l.base)) < 1e-14);
        CHECK(std::abs(l.defect(l.at(cx{0.3, -1.7}))) < 1e-14);
        CHECK(std::abs(l.project(l.at(cx{0.3, -1.7})) - cx{0.3, -1.7}) < 1e-14);
    }
    CHECK_FALSE(is_generic(AffineLine::through({0.0, 0.0}, {1.0, 0.01})));
    CHECK_THROWS_AS(random_line(1, 0.0), std::invalid_argument);
    const auto j = line_from_json(to_json(a));
    CHECK(distance(j.base, a.base) == 0.0);
}

TEST_CASE("banded LU agrees with a dense solve, including zero diagonals")
{
    RngStream rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + trial;
        BandedLU lu(n, 2, 2);
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
                const cx v = (i == j && trial % 2 == 0) ? cx{0.0} : rng.disk(1.0);
                A(i, j) = v;
                lu.at(i, j) = v;
            }
        Eigen::VectorXcd b(n);
        std::vector<cx> x(n);
        for (int i = 0; i < n; ++i) x[i] = b(i) = rng.disk(1.0);
        REQUIRE(lu.factor());
        lu.solve(x);
        const Eigen::VectorXcd ref = A.fullPivLu().solve(b);
        for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - ref(i)) < 1e-9 * (1.0 + ref.norm()));
    }
}

TEST_CASE("n = 1 roots equal the companion roots of the composed quartic")
{
    for (const auto& f : {HenonMap::quadratic(1.0, -10.0), HenonMap::quadratic(cx{0.7, 0.2}, cx{-1.5, 0.8})}) {
        const auto [lp, lm] = default_lines(f, 13);
        // (x, y) -> (y, y^2 + c - a x) applied twice to gamma-(t) = base + t dir
        const cx a = f.factors()[0].a;
        const cx c = f.factors()[0].coeffs[0];
        poly::Poly x{lm.base.x, lm.dir.x};
        poly::Poly y{lm.base.y, lm.dir.y};
        for (int k = 0; k < 2; ++k) {
            poly::Poly ny = poly::add(poly::add(poly::mul(y, y), poly::Poly{c}), poly::scale(x, -a));
            x = y;
            y = ny;
        }
        const poly::Poly g = poly::add(poly::add(poly::scale(x, lp.alpha), poly::scale(y, lp.beta)), poly::Poly{-lp.c});
        REQUIRE(poly::degree(g) == 4);
        std::vector<Point2> oracle;
        for (const cx& t : poly::roots(g)) oracle.push_back(evaluate(f, lm.at(t)));
        REQUIRE(oracle.size() == 4);

        const auto r = sample_mu(f, 1, {lp, lm}, 4 + 200, 3);
        CHECK(r.diagnostics.roots == 4);
        CHECK(hausdorff(sample_points(r, 1), oracle) < 1e-8);
    }
}

TEST_CASE("sampler roots at (1, -10) are complete, distinct and deterministic")
{
    const auto f = HenonMap::quadratic(1.0, -10.0);
    const auto lines = default_lines(f, 4);
    for (int n = 2; n <= 5; ++n) {
        const auto r = sample_mu(f, n, lines, 1LL << (2 * n), 8);
        CHECK(r.diagnostics.roots == (1LL << (2 * n)));
        CHECK(r.diagnostics.duplicates == 0);
        for (const auto& s : r.roots) {
            CHECK(s.residual < 1e-9);
            CHECK(std::abs(lines.second.defect(s.first)) < 1e-9);
            CHECK(std::abs(lines.first.defect(s.last)) < 1e-9);
            CHECK(in_K(f, s.point, n - 2 > 0 ? n - 2 : 1) == KVerdict::in_k);
        }
    }
    const auto a = sample_mu(f, 4, lines, 400, 8, Execution::parallel);
    const auto b = sample_mu(f, 4, lines, 400, 8, Execution::serial);
    REQUIRE(a.roots.size() == b.roots.size());
    for (std::size_t i = 0; i < a.roots.size(); ++i) CHECK(a.roots[i].point == b.roots[i].point);
}

TEST_CASE("random-start searches find the same roots as branch codes")
{
    const auto f = HenonMap::quadratic(1.0, -10.0);
    const auto lines = default_lines(f, 21);
    const auto coded = sample_mu(f, 2, lines, 16, 1);
    // budget beyond d^(2n) adds random starts on circles; nothing new may appear
    const auto more = sample_mu(f, 2, lines, 16 + 3000, 1);
    CHECK(more.diagnostics.roots == 16);
    CHECK(hausdorff(sample_points(coded, 2), sample_points(more, 2)) < 1e-10);
    CHECK(more.diagnostics.duplicates > 0);
}

TEST_CASE("green values of level-n points scale like d^-n")
{
    // G+(w_n) = 2^-n G+(w_2n) and G-(w_n) = 2^-n G-(w_0): the support check needs 2^-n max G < 5e-3
    const auto f = HenonMap::quadratic(1.0, -10.0);
    const int n = 5;
    const auto r = sample_mu(f, n, default_lines(f, 2), 1LL << (2 * n), 5);
    for (const auto& s : r.roots) {
        const auto gp_end = green(f, s.last, Direction::forward, 1e-13);
        const auto gm_start = green(f, s.first, Direction::backward, 1e-13);
        CHECK(std::abs(s.g_plus - gp_end.value / 32.0) < 1e-9);
        CHECK(std::abs(s.g_minus - gm_start.value / 32.0) < 1e-9);
        CHECK(s.verified == (std::max(s.g_plus, s.g_minus) < kSupportTol));
    }
    // at this level nothing is close enough to K
    CHECK(r.diagnostics.found == 0);
    CHECK(r.diagnostics.root_deficit == 1.0);
    CHECK(r.measure.size() == 0);
    CHECK_FALSE(r.diagnostics.warnings.empty());
}

TEST_CASE("pulled-back sample points lie on the shifted intersection")
{
    const auto f = HenonMap::quadratic(cx{0.95, 0.05}, cx{-8.0, 0.5});
    const int n = 4;
    const auto [lp, lm] = default_lines(f, 6);
    const auto r = sample_mu(f, n, {lp, lm}, 1LL << (2 * n), 2);
    CHECK(r.diagnostics.roots == 256);
    for (const auto& s : r.roots) {
        const Point2 z = evaluate(f, s.point);
        Point2 fwd = z, bwd = z;
        for (int k = 0; k < n - 1; ++k) fwd = evaluate(f, fwd);
        for (int k = 0; k < n + 1; ++k) bwd = evaluate_inverse(f, bwd);
        CHECK(std::abs(lp.defect(fwd)) < 1e-9);
        CHECK(std::abs(lm.defect(bwd)) < 1e-9 * (1.0 + max_norm(bwd)));
    }
}

TEST_CASE("sampler argument checks")
{
    const auto f = HenonMap::quadratic(1.0, -10.0);
    const auto lines = default_lines(f, 1);
    CHECK_THROWS_AS(sample_mu(f, 0, lines, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_mu(f, 1, lines, 0, 1), std::invalid_argument);
    const auto axis = AffineLine::through({0.0, 0.0}, {1.0, 0.0});
    CHECK_THROWS_AS(sample_mu(f, 1, {axis, lines.second}, 10, 1), std::invalid_argument);
}
