#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "henon/census.hpp"
#include "henon/escape.hpp"
#include "henon/sampler.hpp"
#include "henon/spectral.hpp"

namespace henon {

inline constexpr const char* kVersion = "1.0.0";

nlohmann::json to_json(const PeriodicRecord& r);
PeriodicRecord record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CensusDiagnostics& d);

/// {"map", "period", "records", "diagnostics"}.
nlohmann::json census_to_json(const HenonMap& f, int n, const CensusResult& c);

struct CensusFile {
    HenonMap map;
    int period = 0;
    CensusResult census;
};

CensusFile census_from_json(const nlohmann::json& j);

/// Adds eigen_log_moduli, eigen_args, classification, dist_to_one and
/// angle_us to every record of a census document, plus a top-level
/// "tangency" block for eta.
void classify_census_json(nlohmann::json& doc, double eps, double eta, Execution exec = Execution::parallel);

nlohmann::json to_json(const TangencyStats& t);
nlohmann::json to_json(const GreenValue& g);
nlohmann::json to_json(const SamplerDiagnostics& d);

/// Sampler output: the measure document plus "diagnostics".
nlohmann::json sample_to_json(const SampleResult& r);

/// Points from a bare array of [xr, xi, yr, yi], a measure document, or a
/// census document.
std::vector<Point2> points_from_json(const nlohmann::json& j);

/// {"module", "version", "config_hash"} stamped on every output document.
nlohmann::json meta_block(const std::string& module, const std::string& config_hash);

/// 16 hex digits of FNV-1a over the compact dump (keys are sorted).
std::string hash_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
/// Writes j.dump(1) and a trailing newline; parent directories are created.
void write_json_file(const std::string& path, const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace henon
