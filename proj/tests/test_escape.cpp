#include <doctest.h>

#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "henon/escape.hpp"
#include "henon/rng.hpp"

using namespace henon;

namespace {

// Points of the radius-4R bidisk whose orbit escapes within 60 steps.
std::vector<Point2> escaping_points(const HenonMap& f, Direction dir, int count, std::uint64_t seed)
{
    RngStream rng(seed);
    std::vector<Point2> pts;
    while (static_cast<int>(pts.size()) < count) {
        const Point2 z = rng.bidisk(4.0 * f.radius());
        if (escape_time(f, z, 60, dir)) pts.push_back(z);
    }
    return pts;
}

}  // namespace

TEST_CASE("filtration radius of y^2")
{
    const auto f = HenonMap::quadratic(1.0, 0.0);
    const double R = f.radius();
    CHECK(R >= 3.0 - 1e-9);
    CHECK(R <= 10.0);
    CHECK(R == doctest::Approx(3.0));
    CHECK(HenonMap::quadratic(1.0, -10.0).radius() == doctest::Approx(5.0));
}

TEST_CASE("filtration radius is monotone in coefficient size")
{
    double prev = 0.0;
    for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double R = HenonMap::quadratic(cx{0.6, 0.2} * s, cx{-1.0, 0.7} * s).radius();
        CHECK(R >= prev);
        prev = R;
    }
}

TEST_CASE("filtration radius has the defining property on random boundary samples")
{
    ElementaryFactor cubic{{cx{0.4, -0.3}, cx{-1.1, 0.2}, cx{0.0, 0.5}}, cx{0.8, -0.6}};
    for (const auto& f : {HenonMap::quadratic(1.0, -10.0), HenonMap::quadratic(cx{0.3, 0.9}, cx{-2.0, 1.5}),
                          HenonMap({cubic, ElementaryFactor{{cx{-1.0}, cx{0.2}}, cx{1.4}}})}) {
        const double R = f.radius();
        RngStream rng(17);
        int fwd_fail = 0, bwd_fail = 0;
        for (int i = 0; i < 100000; ++i) {
            // |y| = R * s with s in [1, 3], |x| <= |y|
            const double s = rng.uniform(1.0, 3.0);
            const cx big = std::polar(R * s, rng.uniform(0.0, 2.0 * M_PI));
            const cx small = rng.disk(R * s);
            const Point2 zf{small, big};
            const Point2 wf = evaluate(f, zf);
            if (!(std::abs(wf.y) >= 2.0 * std::abs(zf.y) && std::abs(wf.y) >= std::max(std::abs(wf.x), R))) ++fwd_fail;
            const Point2 zb{big, small};
            const Point2 wb = evaluate_inverse(f, zb);
            if (!(std::abs(wb.x) >= 2.0 * std::abs(zb.x) && std::abs(wb.x) >= std::max(std::abs(wb.y), R))) ++bwd_fail;
        }
        CHECK(fwd_fail == 0);
        CHECK(bwd_fail == 0);
    }
}

TEST_CASE("escape_time basics")
{
    const auto f = HenonMap::quadratic(1.0, 0.0);
    CHECK(escape_time(f, {0.0, 10.0}, 5, Direction::forward) == 0);
    CHECK(escape_time(f, {10.0, 0.0}, 5, Direction::backward) == 0);
    CHECK_THROWS_AS(escape_time(f, {0.0, 0.0}, 0, Direction::forward), std::invalid_argument);

    const auto g = HenonMap::quadratic(1.0, -1.0);
    const double s = 1.0 + std::sqrt(2.0);
    for (int n : {1, 10, 100, 1000}) {
        CHECK_FALSE(escape_time(g, {s, s}, n, Direction::forward).has_value());
        CHECK_FALSE(escape_time(g, {s, s}, n, Direction::backward).has_value());
    }
}

TEST_CASE("orbits double after escape")
{
    const auto f = HenonMap::quadratic(cx{0.7, -0.2}, cx{-1.3, 0.4});
    for (const auto& z : escaping_points(f, Direction::forward, 200, 3)) {
        const int n = *escape_time(f, z, 60, Direction::forward);
        Point2 w = z;
        for (int k = 0; k < n; ++k) w = evaluate(f, w);
        const double y0 = std::abs(w.y);
        for (int m = 1; m <= 5; ++m) {
            w = evaluate(f, w);
            CHECK(std::abs(w.y) >= std::ldexp(y0, m) * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("green of y^2 far out matches a multiprecision deep iteration")
{
    using mp = boost::multiprecision::cpp_bin_float_50;
    const auto f = HenonMap::quadratic(1.0, 0.0);
    // (x, y) -> (y, y^2 - x) with real data stays real
    mp x = 0, y = mp(1e6);
    constexpr int depth = 24;
    for (int k = 0; k < depth; ++k) {
        mp ny = y * y - x;
        x = y;
        y = ny;
    }
    const double oracle = static_cast<double>(log(abs(y)) / pow(mp(2), depth));
    const auto g = green(f, {0.0, 1e6}, Direction::forward, 1e-14);
    CHECK(std::abs(g.value - oracle) < 1e-13);
    CHECK(std::abs(g.value - std::log(1e6)) <= 2e-6 * std::log(1e6));
    CHECK(g.error_bound < 1e-13);
}

TEST_CASE("functional equations of G+ and G-")
{
    for (const auto& f : {HenonMap::quadratic(1.0, -10.0), HenonMap::quadratic(cx{0.7, -0.2}, cx{-1.3, 0.4})}) {
        const double d = f.d();
        double worst_plus = 0.0, worst_minus = 0.0;
        int bound_violations = 0;
        for (const auto& z : escaping_points(f, Direction::forward, 1000, 21)) {
            const auto g0 = green(f, z, Direction::forward, 1e-10);
            const auto g1 = green(f, evaluate(f, z), Direction::forward, 1e-10);
            const double err = std::abs(g1.value - d * g0.value);
            worst_plus = std::max(worst_plus, err);
            if (err > 2.0 * (g1.error_bound + d * g0.error_bound) + 1e-14 * g1.value) ++bound_violations;
        }
        for (const auto& z : escaping_points(f, Direction::backward, 1000, 22)) {
            const auto g0 = green(f, z, Direction::backward, 1e-10);
            const auto g1 = green(f, evaluate_inverse(f, z), Direction::backward, 1e-10);
            worst_minus = std::max(worst_minus, std::abs(g1.value - d * g0.value));
        }
        CHECK(worst_plus < 1e-8);
        CHECK(worst_minus < 1e-8);
        CHECK(bound_violations == 0);
    }
}

TEST_CASE("green handles multi-factor maps")
{
    ElementaryFactor cubic{{cx{0.4, -0.3}, cx{-1.1, 0.2}, cx{0.0, 0.5}}, cx{0.8, -0.6}};
    const HenonMap f({cubic, ElementaryFactor{{cx{-1.0}, cx{0.2}}, cx{1.4}}});
    REQUIRE(f.d() == 6);
    for (Direction dir : {Direction::forward, Direction::backward}) {
        for (const auto& z : escaping_points(f, dir, 200, 8)) {
            const auto g0 = green(f, z, dir, 1e-12);
            const Point2 w = dir == Direction::forward ? evaluate(f, z) : evaluate_inverse(f, z);
            const auto g1 = green(f, w, dir, 1e-12);
            CHECK(std::abs(g1.value - 6.0 * g0.value) < 1e-8 * std::max(1.0, g1.value));
        }
    }
}

TEST_CASE("green is zero exactly on numerically bounded orbits")
{
    const auto f = HenonMap::quadratic(1.0, -1.0);
    const double s = 1.0 + std::sqrt(2.0);
    for (Direction dir : {Direction::forward, Direction::backward}) {
        const auto g = green(f, {s, s}, dir, 1e-10, 500);
        CHECK(g.value == 0.0);
        CHECK(g.depth == 500);
    }

    // consistency: green > 0 iff the orbit escapes within the same depth
    RngStream rng(4);
    const auto h = HenonMap::quadratic(cx{0.5, 0.1}, cx{-0.8, 0.2});
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        const Point2 z = rng.bidisk(h.radius());
        const auto t = escape_time(h, z, 100, Direction::forward);
        try {
            const auto g = green(h, z, Direction::forward, 1e-10, 100);
            CHECK((g.value > 0.0) == t.has_value());
            ++checked;
        } catch (const MaxDepthExceeded&) {
            CHECK_FALSE(t.has_value());
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("error bound shrinks geometrically with depth")
{
    const auto f = HenonMap::quadratic(cx{0.7, -0.2}, cx{-1.3, 0.4});
    for (const auto& z : escaping_points(f, Direction::forward, 50, 12)) {
        int prev_depth = -1;
        double prev_bound = 0.0;
        for (double tol = 1e-3; tol >= 1e-15; tol /= 10.0) {
            const auto g = green(f, z, Direction::forward, tol);
            if (prev_depth >= 0 && g.depth > prev_depth)
                CHECK(g.error_bound <= prev_bound * std::pow(0.5, g.depth - prev_depth) * (1.0 + 1e-9) + 1e-300);
            prev_depth = g.depth;
            prev_bound = g.error_bound;
        }
    }
}

TEST_CASE("in_K verdicts")
{
    const auto f = HenonMap::quadratic(1.0, -1.0);
    const double s = 1.0 + std::sqrt(2.0);
    CHECK(in_K(f, {s, s}, 1000) == KVerdict::in_k);
    CHECK(in_K(HenonMap::quadratic(1.0, 0.0), {0.0, 10.0}, 10) == KVerdict::escapes);
    CHECK(std::string(to_string(KVerdict::undetermined)) == "Undetermined");

    // every InK verdict has its window inside the bidisk
    const auto h = HenonMap::quadratic(1.0, -10.0);
    RngStream rng(2);
    for (int i = 0; i < 5000; ++i) {
        const Point2 z = rng.bidisk(h.radius());
        if (in_K(h, z, 3) != KVerdict::in_k) continue;
        Point2 a = z, b = z;
        for (int k = 0; k < 3; ++k) {
            a = evaluate(h, a);
            b = evaluate_inverse(h, b);
            CHECK(max_norm(a) <= h.radius());
            CHECK(max_norm(b) <= h.radius());
        }
    }
}
