#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "henon/lyapunov.hpp"
#include "henon/measure.hpp"
#include "henon/sampler.hpp"
#include "henon/spectral.hpp"

namespace henon {

struct Budgets {
    /// Census seeds per expected point, seeds = census_seeds_per_point * d^n.
    std::int64_t census_seeds_per_point = 16;
    /// Sampler searches; 0 means d^(2 sampler_n).
    std::int64_t sampler_budget = 0;
    int slices = 256;
    int moments = 4;
    int horizon = kDefaultHorizon;
    int lyapunov_samples = 256;
};

struct Tolerances {
    double census = kDefaultCensusTol;
    double max_root_deficit = kCertifyingDeficit;
    /// Sampler roots with G+ or G- at or above this are rejected.
    double support = kSupportTol;
    double lyapunov_buffer = kExponentBuffer;
};

struct ExperimentConfig {
    HenonMap map = HenonMap::quadratic(1.0, -10.0);
    std::vector<int> periods;
    double eps = 0.1;
    double eta = 0.05;
    int sampler_n = 10;
    Budgets budgets;
    std::uint64_t rng_seed = 1;
    Tolerances tolerances;
    std::string output_dir = "out";
};

/// {"quadratic": {"a", "c"}} or {"factors": [...]}, unknown keys rejected.
HenonMap map_from_description(const nlohmann::json& j);

/// Strict JSON parse. Required: "map" and "periods"; every other field has
/// the default above. Unknown keys, wrong types and violated invariants
/// (eps in (0, 1), periods nonempty and strictly ascending, tolerances and
/// budgets positive) raise ParseError naming the field, or the line and
/// column for malformed text.
ExperimentConfig parse_config(const std::string& text);

/// Effective config with every field present.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Hash of the effective config without output_dir.
std::string config_hash(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

struct PeriodSummary {
    int n = 0;
    std::int64_t points = 0;
    std::int64_t saddles = 0;
    std::int64_t saddles_eps = 0;
    /// d^-n |Q_n| for Q_n = P_n, SP_n, SP_n^eps.
    double raw_mass_p = 0.0;
    double raw_mass_sp = 0.0;
    double raw_mass_sp_eps = 0.0;
    TangencyStats tangency;
    /// Smallest angle between stable and unstable directions over saddles.
    double min_saddle_angle = 0.0;
};

struct ExperimentReport {
    std::string config_hash;
    /// "complete", "non-certified" (reference deficit too large) or "failed".
    std::string status;
    std::vector<PeriodSummary> periods;
    SamplerDiagnostics reference;
    std::map<std::string, ConvergenceReport> convergence;
    std::optional<LyapunovSummary> lyapunov;
    std::vector<std::string> files;
    std::vector<std::string> notes;
};

/// census over periods -> classify -> from_census for P_n, SP_n, SP_n^eps ->
/// sample_mu reference -> convergence reports, tangency and Lyapunov summary.
/// Every file in cfg.output_dir carries the config hash and version; the last
/// one written is manifest.json. If a stage throws, the manifest records the
/// failure and the exception propagates.
ExperimentReport run_equidistribution_experiment(const ExperimentConfig& cfg,
                                                 Execution exec = Execution::parallel);

nlohmann::json to_json(const ExperimentReport& r);
nlohmann::json to_json(const ConvergenceReport& r);

}  // namespace henon
