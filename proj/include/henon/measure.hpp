#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "henon/census.hpp"

namespace henon {

class EmptySelection : public Error {
public:
    using Error::Error;
};

/// Weighted point cloud in C^2; weights sum to 1.
struct EmpiricalMeasure {
    std::vector<Point2> points;
    std::vector<double> weights;
    nlohmann::json provenance = nlohmann::json::object();

    std::size_t size() const { return points.size(); }
    /// Uniform weights over `points`.
    static EmpiricalMeasure uniform(std::vector<Point2> points, nlohmann::json provenance = nlohmann::json::object());
    /// Image of every point under g, weights kept.
    template <class G>
    EmpiricalMeasure pushforward(G&& g) const
    {
        EmpiricalMeasure out{{}, weights, provenance};
        out.points.reserve(points.size());
        for (const auto& z : points) out.points.push_back(g(z));
        return out;
    }
};

/// Throws std::invalid_argument unless weights are nonnegative, match the
/// points and sum to 1 within 1e-12.
void validate(const EmpiricalMeasure& m);

enum class Selector { P_n, SP_n, SP_n_eps };
const char* to_string(Selector s);
Selector selector_from_string(const std::string& s);

/// Uniform measure on the selected census points; the raw mass d^{-n}|Q_n| is
/// stored in provenance["raw_mass"]. Records must be classified for SP_n and
/// SP_n_eps. Throws EmptySelection.
EmpiricalMeasure from_census(std::span<const PeriodicRecord> records, Selector selector, int n, int d);

/// sum_i w_i x^a conj(x)^b y^c conj(y)^e over all (a, b, c, e) with a+b+c+e <= max_order,
/// enumerated by total order, then lexicographically.
std::vector<cx> moments(const EmpiricalMeasure& m, int max_order);
std::vector<std::array<int, 4>> moment_indices(int max_order);

/// Mean over `slices` random unit directions of R^4 of the 1D Wasserstein-1
/// distance between the projected clouds.
double sliced_w1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, int slices, std::uint64_t rng_seed);
/// The same distance along one fixed direction u of R^4 (coordinates Re x, Im x, Re y, Im y).
double projected_w1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, const std::array<double, 4>& u);

/// sliced_w1(t, reference) for every target, sorting each projection of the
/// reference once. Bit-identical to calling sliced_w1 per target.
std::vector<double> sliced_w1_batch(std::span<const EmpiricalMeasure* const> targets,
                                    const EmpiricalMeasure& reference, int slices, std::uint64_t rng_seed);

/// 95th percentile (nearest rank) over `splits` random half-splits of m of
/// the sliced distance between the two halves. All splits share the slice
/// directions, so each projection is sorted once.
double noise_floor(const EmpiricalMeasure& m, int slices, int splits, std::uint64_t rng_seed);

struct ConvergenceRow {
    int n = 0;
    double raw_mass = 0.0;
    double moment_distance = 0.0;
    double w1 = 0.0;
    /// Distance to the previous entry of the series (0 for the first).
    double successive = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double noise_floor = 0.0;
    /// Indices n at which w1 rose by more than the noise floor.
    std::vector<int> non_monotone;
};

inline constexpr int kNoiseSplits = 50;
/// Slices used for the noise floor of a reference.
inline constexpr int kNoiseSlices = 32;

/// Rows for each (n, measure) against the reference. The noise floor is that
/// of the reference unless given.
ConvergenceReport convergence_report(std::span<const std::pair<int, EmpiricalMeasure>> series,
                                     const EmpiricalMeasure& reference, int max_order, int slices,
                                     std::uint64_t rng_seed = 0, std::optional<double> floor = std::nullopt);
std::string to_csv(const ConvergenceReport& r);

/// Area of the graph of x -> x^m over |x| <= 1 - delta divided by its area
/// over the unit disk, by adaptive quadrature.
double pathological_graph_mass_ratio(int m, double delta);

nlohmann::json to_json(const EmpiricalMeasure& m);
EmpiricalMeasure measure_from_json(const nlohmann::json& j);

}  // namespace henon
