#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "henon/map.hpp"
#include "henon/parallel.hpp"

namespace henon {

class OrbitEscaped : public Error {
public:
    using Error::Error;
};

/// Finite-time exponents in nats per iteration, lambda1 >= lambda2 for orbits
/// with a dominated splitting (not enforced).
struct LyapunovEstimate {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int horizon = 0;
    Point2 start;
    /// First frame vector when accumulation starts and after the last step;
    /// close to the expanding direction there once aligned.
    Point2 frame_start;
    Point2 frame_end;
    /// Distance from the requested point to the orbit actually used.
    double shadow_distance = 0.0;
};

inline constexpr int kDefaultHorizon = 200;
/// Steps spent aligning the frame before accumulation starts.
inline constexpr int kFrameWarmup = 64;

/// QR cocycle along nodes w_0 .. w_{warmup + N}, an orbit of f (or of f^{-1}
/// for Direction::backward). The frame [q1, q2] is pushed through the
/// derivative and re-orthonormalized after every step; the logs of the
/// triangular diagonal are summed over the last N steps only.
/// Throws invalid_argument if consecutive nodes are not an orbit.
LyapunovEstimate exponents_along(const HenonMap& f, std::span<const Point2> nodes, int warmup, Direction dir,
                                 const Point2& frame = {1.0, 0.0});

/// Forward orbit of z computed directly, horizon steps. The frame is first
/// aligned along the backward orbit of z, up to kFrameWarmup steps while it
/// stays out of the backward escape region. Throws OrbitEscaped when the
/// forward orbit enters the escape region before the horizon.
LyapunovEstimate finite_time_exponents(const HenonMap& f, const Point2& z, int horizon,
                                       const Point2& frame = {1.0, 0.0});

/// Cycle z_0 .. z_{n-1} repeated for horizon steps after a warm-up lap.
LyapunovEstimate periodic_exponents(const HenonMap& f, std::span<const Point2> cycle, int horizon,
                                    const Point2& frame = {1.0, 0.0});

struct ShadowOrbit {
    /// Orbit w_{-before} .. w_{after}; nodes[before] is the point near z.
    std::vector<Point2> nodes;
    int before = 0;
    double distance = 0.0;
    double residual = 0.0;
};

/// An orbit segment of f through a point near z, found on the inverse
/// branches of the factors. The branch sequence follows the itinerary of the
/// floating-point orbit of z while it stays in the bidisk of radius R and is
/// drawn at random beyond it. Needed because orbits on K are unstable in
/// floating point and leave any neighbourhood within a few dozen steps.
/// Throws NoConvergence when the branch iteration does not contract (K not
/// a horseshoe).
ShadowOrbit shadow_orbit(const HenonMap& f, const Point2& z, int before, int after, std::uint64_t rng_seed);

/// finite-time exponents along the shadow orbit of z, warm-up kFrameWarmup.
LyapunovEstimate shadow_exponents(const HenonMap& f, const Point2& z, int horizon, std::uint64_t rng_seed,
                                  const Point2& frame = {1.0, 0.0});

struct LyapunovRecord {
    Point2 point;
    std::optional<LyapunovEstimate> estimate;
    std::string error;
};

/// Exponents for every point, direct orbit when it stays bounded, shadow orbit
/// otherwise (when `shadow`). Task i uses stream child("lyapunov").child(i).
std::vector<LyapunovRecord> batch_exponents(const HenonMap& f, std::span<const Point2> points, int horizon,
                                            bool shadow, std::uint64_t rng_seed,
                                            Execution exec = Execution::parallel);

struct LyapunovSummary {
    std::int64_t count = 0;
    std::int64_t failed = 0;
    double mean1 = 0.0;
    double mean2 = 0.0;
    /// Fractions with lambda1 >= log(d)/2 - buffer and lambda2 <= -log(d)/2 + buffer.
    double frac_expanding = 0.0;
    double frac_contracting = 0.0;
    /// max |lambda1 + lambda2 - log|det Df||.
    double sum_law_error = 0.0;
};

inline constexpr double kExponentBuffer = 0.1;

LyapunovSummary summarize(const HenonMap& f, std::span<const LyapunovRecord> records,
                          double buffer = kExponentBuffer);

nlohmann::json to_json(const LyapunovEstimate& e);
nlohmann::json to_json(const LyapunovRecord& r);
nlohmann::json to_json(const LyapunovSummary& s);

}  // namespace henon
