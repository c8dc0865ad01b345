#include "henon/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "henon/rng.hpp"

namespace henon {

namespace {

// JSON has no inf/nan; store them as null
nlohmann::json num(double x)
{
    if (std::isfinite(x)) return x;
    return nullptr;
}

double num_from(const nlohmann::json& j)
{
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const PeriodicRecord& r)
{
    nlohmann::json orbit = nlohmann::json::array();
    for (const auto& z : r.orbit) orbit.push_back(point_to_json(z));
    nlohmann::json j = {{"point", point_to_json(r.point)},
                        {"n", r.n},
                        {"exact_period", r.exact_period},
                        {"residual", num(r.residual)},
                        {"orbit", orbit},
                        {"multiplicity_flag", r.multiplicity_flag}};
    if (r.spectral) {
        const auto& s = *r.spectral;
        j["eigen_log_moduli"] = {num(s.log_moduli[0]), num(s.log_moduli[1])};
        j["eigen_args"] = {num(s.args[0]), num(s.args[1])};
        j["dist_to_one"] = num(s.dist_to_one);
        j["angle_us"] = num(s.angle_us);
        j["e_u"] = point_to_json(s.e_u);
        j["e_s"] = point_to_json(s.e_s);
    }
    if (r.classification) j["classification"] = to_string(*r.classification);
    return j;
}

PeriodicRecord record_from_json(const nlohmann::json& j)
{
    PeriodicRecord r;
    r.point = point_from_json(j.at("point"));
    r.n = j.at("n").get<int>();
    r.exact_period = j.value("exact_period", 0);
    r.residual = num_from(j.at("residual"));
    for (const auto& z : j.at("orbit")) r.orbit.push_back(point_from_json(z));
    r.multiplicity_flag = j.value("multiplicity_flag", false);
    if (j.contains("eigen_log_moduli")) {
        SpectralData s;
        for (int i = 0; i < 2; ++i) {
            s.log_moduli[i] = num_from(j.at("eigen_log_moduli").at(i));
            s.args[i] = num_from(j.at("eigen_args").at(i));
        }
        s.dist_to_one = num_from(j.at("dist_to_one"));
        s.angle_us = num_from(j.at("angle_us"));
        s.e_u = point_from_json(j.at("e_u"));
        s.e_s = point_from_json(j.at("e_s"));
        r.spectral = s;
    }
    if (j.contains("classification")) r.classification = point_class_from_string(j.at("classification"));
    return r;
}

nlohmann::json to_json(const CensusDiagnostics& d)
{
    return {{"attempted", d.attempted}, {"converged", d.converged},         {"no_convergence", d.no_convergence},
            {"singular", d.singular},   {"deduped", d.deduped},             {"warnings", d.warnings}};
}

nlohmann::json census_to_json(const HenonMap& f, int n, const CensusResult& c)
{
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : c.records) recs.push_back(to_json(r));
    return {{"map", map_to_json(f)}, {"period", n}, {"records", recs}, {"diagnostics", to_json(c.diagnostics)}};
}

CensusFile census_from_json(const nlohmann::json& j)
{
    try {
        CensusFile out{map_from_json(j.at("map")), j.at("period").get<int>(), {}};
        for (const auto& r : j.at("records")) out.census.records.push_back(record_from_json(r));
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            auto& cd = out.census.diagnostics;
            cd.attempted = d.value("attempted", std::int64_t{0});
            cd.converged = d.value("converged", std::int64_t{0});
            cd.no_convergence = d.value("no_convergence", std::int64_t{0});
            cd.singular = d.value("singular", std::int64_t{0});
            cd.deduped = d.value("deduped", std::int64_t{0});
            cd.warnings = d.value("warnings", std::vector<std::string>{});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("census document: ") + e.what());
    }
}

nlohmann::json to_json(const TangencyStats& t)
{
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& b : t.histogram) hist.push_back({{"lo", num(b.lo)}, {"hi", num(b.hi)}, {"count", b.count}});
    return {{"count_near_tangent", t.count_near_tangent}, {"fraction", t.fraction}, {"histogram", hist}};
}

void classify_census_json(nlohmann::json& doc, double eps, double eta, Execution exec)
{
    auto file = census_from_json(doc);
    auto& recs = file.census.records;
    classify_records(file.map, recs, eps, exec);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : recs) out.push_back(to_json(r));
    doc["records"] = out;
    doc["eps"] = eps;
    doc["tangency"] = to_json(tangency_statistic(recs, eta, file.map.d()));
    doc["tangency"]["eta"] = eta;
}

nlohmann::json to_json(const GreenValue& g)
{
    return {{"value", num(g.value)}, {"depth", g.depth}, {"error_bound", num(g.error_bound)}};
}

nlohmann::json to_json(const SamplerDiagnostics& d)
{
    return {{"attempted", d.attempted},
            {"converged", d.converged},
            {"duplicates", d.duplicates},
            {"roots", d.roots},
            {"rejected_not_in_k", d.rejected_not_in_k},
            {"found", d.found},
            {"expected", d.expected},
            {"root_deficit", d.root_deficit},
            {"warnings", d.warnings}};
}

nlohmann::json sample_to_json(const SampleResult& r)
{
    auto j = to_json(r.measure);
    j["diagnostics"] = to_json(r.diagnostics);
    return j;
}

std::vector<Point2> points_from_json(const nlohmann::json& j)
{
    std::vector<Point2> pts;
    try {
        if (j.is_array()) {
            for (const auto& p : j) pts.push_back(point_from_json(p));
        } else if (j.contains("records")) {
            for (const auto& r : j.at("records")) pts.push_back(point_from_json(r.at("point")));
        } else if (j.contains("points")) {
            for (const auto& p : j.at("points")) pts.push_back(point_from_json(p));
        } else {
            throw ParseError("points document: expected an array, \"points\" or \"records\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("points document: ") + e.what());
    }
    return pts;
}

nlohmann::json meta_block(const std::string& module, const std::string& config_hash)
{
    return {{"module", module}, {"version", kVersion}, {"config_hash", config_hash}};
}

std::string hash_json(const nlohmann::json& j)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) { write_text_file(path, j.dump(1) + "\n"); }

}  // namespace henon
