#pragma once

#include <span>
#include <tuple>
#include <vector>

#include "henon/census.hpp"

namespace henon {

class DegenerateOrbit : public Error {
public:
    using Error::Error;
};

class NearDefective : public Error {
public:
    using Error::Error;
};

inline constexpr double kThresholdTie = 1e-8;

/// Spectral data of Df^n = Df(z_{n-1}) ... Df(z_0) along a verified cycle.
///
/// The product is accumulated with the largest entry factored out after every
/// step (its log goes to a separate accumulator), so moduli are never formed
/// directly. The determinant is accumulated as a sum of per-step logs, and
/// lambda2 = det / lambda1 avoids cancellation in the small eigenvalue.
SpectralData differential_along_orbit(const HenonMap& f, std::span<const Point2> orbit,
                                      double residual_tol = 1e-9);

/// Same product without rescaling; only meaningful while it is representable.
Mat2 naive_orbit_product(const HenonMap& f, std::span<const Point2> orbit);

/// Saddle iff |lambda1| > 1 > |lambda2|; saddle_eps when additionally
/// log|lambda1| > (n/2) log(d+ - eps) and log|lambda2| < -(n/2) log(d- - eps).
/// Moduli within kThresholdTie (log scale) of any threshold are indeterminate.
PointClass classify(const SpectralData& spec, int n, const HenonMap& f, double eps);

struct Directions {
    Point2 e_s;
    Point2 e_u;
    double angle_us = 0.0;
};

/// Eigen-directions of a saddle. Throws NearDefective when the eigenvalues
/// (nearly) coincide.
Directions stable_unstable_directions(const SpectralData& spec);

/// Principal angle between the complex lines spanned by two vectors, in [0, pi/2].
double principal_angle(const Point2& u, const Point2& v);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t count = 0;
};

struct TangencyStats {
    std::int64_t count_near_tangent = 0;
    double fraction = 0.0;
    /// Histogram of log10(dist_to_one), unit-width bins.
    std::vector<HistogramBin> histogram;
};

/// Counts records with an eigenvalue of Df^n within eta of 1, normalized by d^n.
TangencyStats tangency_statistic(std::span<const PeriodicRecord> records, double eta, int d);

/// Fills spectral data and classification of every record.
void classify_records(const HenonMap& f, std::vector<PeriodicRecord>& records, double eps,
                      Execution exec = Execution::parallel);

}  // namespace henon
