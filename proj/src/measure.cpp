#include "henon/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "henon/rng.hpp"

namespace henon {

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<Point2> points, nlohmann::json provenance)
{
    EmpiricalMeasure m;
    const double w = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
    m.weights.assign(points.size(), w);
    m.points = std::move(points);
    m.provenance = std::move(provenance);
    return m;
}

void validate(const EmpiricalMeasure& m)
{
    if (m.points.size() != m.weights.size()) throw std::invalid_argument("measure: points and weights differ in size");
    double s = 0.0;
    for (double w : m.weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("measure: negative weight");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("measure: weights do not sum to 1");
}

const char* to_string(Selector s)
{
    switch (s) {
    case Selector::P_n: return "P_n";
    case Selector::SP_n: return "SP_n";
    case Selector::SP_n_eps: return "SP_n_eps";
    }
    return "?";
}

Selector selector_from_string(const std::string& s)
{
    if (s == "P_n") return Selector::P_n;
    if (s == "SP_n") return Selector::SP_n;
    if (s == "SP_n_eps") return Selector::SP_n_eps;
    throw std::invalid_argument("unknown selector: " + s);
}

EmpiricalMeasure from_census(std::span<const PeriodicRecord> records, Selector selector, int n, int d)
{
    std::vector<Point2> pts;
    for (const auto& r : records) {
        bool take = true;
        if (selector != Selector::P_n) {
            if (!r.classification) throw std::invalid_argument("from_census: records are not classified");
            const PointClass c = *r.classification;
            take = selector == Selector::SP_n ? (c == PointClass::saddle || c == PointClass::saddle_eps)
                                              : c == PointClass::saddle_eps;
        }
        if (take) pts.push_back(r.point);
    }
    if (pts.empty()) throw EmptySelection(std::string("from_census: no point selected by ") + to_string(selector));
    const double raw = static_cast<double>(pts.size()) / std::pow(static_cast<double>(d), n);
    const auto count = pts.size();
    return EmpiricalMeasure::uniform(std::move(pts), {{"source", "census"},
                                                      {"selector", to_string(selector)},
                                                      {"n", n},
                                                      {"count", count},
                                                      {"raw_mass", raw}});
}

std::vector<std::array<int, 4>> moment_indices(int max_order)
{
    std::vector<std::array<int, 4>> idx;
    for (int total = 0; total <= max_order; ++total)
        for (int a = total; a >= 0; --a)
            for (int b = total - a; b >= 0; --b)
                for (int c = total - a - b; c >= 0; --c) idx.push_back({a, b, c, total - a - b - c});
    return idx;
}

std::vector<cx> moments(const EmpiricalMeasure& m, int max_order)
{
    if (max_order < 1) throw std::invalid_argument("moments: max_order must be >= 1");
    const auto idx = moment_indices(max_order);
    std::vector<cx> out(idx.size());
    std::vector<cx> px(max_order + 1), pxc(max_order + 1), py(max_order + 1), pyc(max_order + 1);
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        const Point2& z = m.points[i];
        px[0] = pxc[0] = py[0] = pyc[0] = 1.0;
        for (int k = 1; k <= max_order; ++k) {
            px[k] = px[k - 1] * z.x;
            pxc[k] = pxc[k - 1] * std::conj(z.x);
            py[k] = py[k - 1] * z.y;
            pyc[k] = pyc[k - 1] * std::conj(z.y);
        }
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const auto& [a, b, c, e] = idx[j];
            out[j] += m.weights[i] * px[a] * pxc[b] * py[c] * pyc[e];
        }
    }
    return out;
}

namespace {

using Projection = std::vector<std::pair<double, double>>;

double project(const std::array<double, 4>& u, const Point2& z)
{
    return u[0] * z.x.real() + u[1] * z.x.imag() + u[2] * z.y.real() + u[3] * z.y.imag();
}

Projection sorted_projection(const EmpiricalMeasure& m, const std::array<double, 4>& u)
{
    Projection v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = {project(u, m.points[i]), m.weights[i]};
    std::sort(v.begin(), v.end());
    return v;
}

// integral of |F_a - F_b| for two sorted projections
double merged_w1(const Projection& a, const Projection& b)
{
    std::size_t i = 0, j = 0;
    double cum = 0.0, w1 = 0.0, prev = 0.0;
    bool first = true;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j == b.size() || (i < a.size() && a[i].first <= b[j].first)) {
            x = a[i].first;
            if (!first) w1 += std::abs(cum) * (x - prev);
            cum += a[i++].second;
        } else {
            x = b[j].first;
            if (!first) w1 += std::abs(cum) * (x - prev);
            cum -= b[j++].second;
        }
        prev = x;
        first = false;
    }
    return w1;
}

void check_slices(int slices)
{
    if (slices < 1) throw std::invalid_argument("sliced_w1: slices must be >= 1");
}

}  // namespace

double projected_w1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, const std::array<double, 4>& u)
{
    return merged_w1(sorted_projection(m1, u), sorted_projection(m2, u));
}

double sliced_w1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, int slices, std::uint64_t rng_seed)
{
    const EmpiricalMeasure* t[] = {&m1};
    return sliced_w1_batch(t, m2, slices, rng_seed)[0];
}

std::vector<double> sliced_w1_batch(std::span<const EmpiricalMeasure* const> targets,
                                    const EmpiricalMeasure& reference, int slices, std::uint64_t rng_seed)
{
    check_slices(slices);
    const RngStream root = RngStream(rng_seed).child("slices");
    const std::size_t T = targets.size();
    std::vector<double> d(static_cast<std::size_t>(slices) * T);
    for_each_index(static_cast<std::size_t>(slices), Execution::parallel, [&](std::size_t s) {
        const auto u = root.child(static_cast<std::uint64_t>(s)).sphere4();
        const auto ref = sorted_projection(reference, u);
        for (std::size_t t = 0; t < T; ++t) d[s * T + t] = merged_w1(sorted_projection(*targets[t], u), ref);
    });
    std::vector<double> out(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double sum = 0.0;
        for (int s = 0; s < slices; ++s) sum += d[static_cast<std::size_t>(s) * T + t];
        out[t] = sum / slices;
    }
    return out;
}

namespace {

double distance(const std::vector<cx>& a, const std::vector<cx>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

double noise_floor(const EmpiricalMeasure& m, int slices, int splits, std::uint64_t rng_seed)
{
    if (m.size() < 2) throw std::invalid_argument("noise_floor: need at least two points");
    if (splits < 1 || splits > 64) throw std::invalid_argument("noise_floor: splits must be in [1, 64]");
    check_slices(slices);
    const RngStream root = RngStream(rng_seed).child("noise-floor");
    const std::size_t N = m.size(), S = static_cast<std::size_t>(splits);

    // bit s of in_a[i]: point i lies in the first half of split s
    std::vector<std::uint64_t> in_a(N, 0);
    std::vector<double> mass_a(S, 0.0), mass_b(S, 0.0);
    std::vector<std::size_t> idx(N);
    for (std::size_t s = 0; s < S; ++s) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        RngStream rng = root.child(static_cast<std::uint64_t>(s));
        rng.shuffle(idx);
        for (std::size_t k = 0; k < N / 2; ++k) in_a[idx[k]] |= std::uint64_t{1} << s;
        for (std::size_t i = 0; i < N; ++i) ((in_a[i] >> s) & 1 ? mass_a : mass_b)[s] += m.weights[i];
    }
    for (std::size_t s = 0; s < S; ++s)
        if (!(mass_a[s] > 0.0 && mass_b[s] > 0.0)) throw std::invalid_argument("noise_floor: split with zero mass");

    const RngStream dirs = root.child("slices");
    std::vector<double> d(static_cast<std::size_t>(slices) * S);
    for_each_index(static_cast<std::size_t>(slices), Execution::parallel, [&](std::size_t k) {
        const auto u = dirs.child(static_cast<std::uint64_t>(k)).sphere4();
        std::vector<std::pair<double, std::size_t>> v(N);
        for (std::size_t i = 0; i < N; ++i) v[i] = {project(u, m.points[i]), i};
        std::sort(v.begin(), v.end());
        for (std::size_t s = 0; s < S; ++s) {
            const double ia = 1.0 / mass_a[s], ib = 1.0 / mass_b[s];
            double cum = 0.0, w1 = 0.0;
            for (std::size_t r = 0; r + 1 < N; ++r) {
                const std::size_t i = v[r].second;
                cum += (in_a[i] >> s) & 1 ? m.weights[i] * ia : -m.weights[i] * ib;
                w1 += std::abs(cum) * (v[r + 1].first - v[r].first);
            }
            d[k * S + s] = w1;
        }
    });
    std::vector<double> per_split(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        for (int k = 0; k < slices; ++k) per_split[s] += d[static_cast<std::size_t>(k) * S + s];
        per_split[s] /= slices;
    }
    std::sort(per_split.begin(), per_split.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * splits));
    return per_split[std::max<std::size_t>(rank, 1) - 1];
}

ConvergenceReport convergence_report(std::span<const std::pair<int, EmpiricalMeasure>> series,
                                     const EmpiricalMeasure& reference, int max_order, int slices,
                                     std::uint64_t rng_seed, std::optional<double> floor)
{
    ConvergenceReport rep;
    const auto ref_moments = moments(reference, max_order);
    rep.noise_floor = floor ? *floor : noise_floor(reference, std::min(slices, kNoiseSlices), kNoiseSplits, rng_seed);
    std::vector<const EmpiricalMeasure*> targets;
    for (const auto& [n, m] : series) targets.push_back(&m);
    const auto w1 = sliced_w1_batch(targets, reference, slices, rng_seed);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& [n, m] = series[i];
        ConvergenceRow row;
        row.n = n;
        row.raw_mass = m.provenance.value("raw_mass", 1.0);
        row.moment_distance = distance(moments(m, max_order), ref_moments);
        row.w1 = w1[i];
        if (i > 0) row.successive = sliced_w1(m, series[i - 1].second, slices, rng_seed);
        if (i > 0 && row.w1 > rep.rows.back().w1 + rep.noise_floor) rep.non_monotone.push_back(n);
        rep.rows.push_back(row);
    }
    return rep;
}

std::string to_csv(const ConvergenceReport& r)
{
    std::string s = "n,raw_mass,moment_dist,sw1,sw1_successive\n";
    char buf[256];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", row.n, row.raw_mass, row.moment_distance,
                      row.w1, row.successive);
        s += buf;
    }
    return s;
}

double pathological_graph_mass_ratio(int m, double delta)
{
    if (m < 1) throw std::invalid_argument("pathological_graph_mass_ratio: power must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("pathological_graph_mass_ratio: delta in (0, 1)");
    // Area element of the graph of x^m in polar coordinates is r (1 + m^2 r^(2m-2)) dr.
    // The mass sits in a layer of width ~1/m below the rim, so integrate in
    // s with r = rho exp(-s / 2m), where the integrand becomes
    // r^2 / 2m + (m / 2) r^(2m) and both terms are smooth exponentials in s.
    const double mm = m;
    auto area = [mm](double rho) {
        const double log_rho = std::log(rho);
        auto h = [&](double s) {
            const double log_r = log_rho - s / (2.0 * mm);
            return std::exp(2.0 * log_r) / (2.0 * mm) + 0.5 * mm * std::exp(2.0 * mm * log_r);
        };
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            h, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-12);
    };
    return area(1.0 - delta) / area(1.0);
}

nlohmann::json to_json(const EmpiricalMeasure& m)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& z : m.points) pts.push_back(point_to_json(z));
    return {{"points", pts}, {"weights", m.weights}, {"provenance", m.provenance}};
}

EmpiricalMeasure measure_from_json(const nlohmann::json& j)
{
    EmpiricalMeasure m;
    for (const auto& p : j.at("points")) m.points.push_back(point_from_json(p));
    m.weights = j.at("weights").get<std::vector<double>>();
    m.provenance = j.value("provenance", nlohmann::json::object());
    validate(m);
    return m;
}

}  // namespace henon
