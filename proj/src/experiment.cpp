#include "henon/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "henon/census.hpp"
#include "henon/io.hpp"
#include "henon/rng.hpp"

namespace henon {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ParseError(where + ": unknown key \"" + k + "\"");
}

std::string field(const std::string& where, const std::string& key)
{
    return where.empty() ? key : where + "." + key;
}

double get_real(const json& obj, const std::string& key, const std::string& where, double def)
{
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ParseError(field(where, key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(field(where, key) + ": must be finite");
    return x;
}

std::int64_t get_int(const json& obj, const std::string& key, const std::string& where, std::int64_t def)
{
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ParseError(field(where, key) + ": expected an integer");
    return v.get<std::int64_t>();
}

void require(bool ok, const std::string& what)
{
    if (!ok) throw ParseError(what);
}

ExperimentConfig from_json(const json& j)
{
    check_keys(j,
               {"map", "periods", "eps", "eta", "sampler_n", "budgets", "rng_seed", "tolerances", "output_dir"},
               "config");
    ExperimentConfig cfg;
    if (!j.contains("map")) throw ParseError("map: required");
    cfg.map = map_from_description(j.at("map"));

    if (!j.contains("periods")) throw ParseError("periods: required");
    const auto& per = j.at("periods");
    if (!per.is_array() || per.empty()) throw ParseError("periods: expected a nonempty array");
    for (const auto& p : per) {
        if (!p.is_number_integer()) throw ParseError("periods: expected integers");
        cfg.periods.push_back(p.get<int>());
    }
    require(cfg.periods.front() >= 1, "periods: must be >= 1");
    for (std::size_t i = 1; i < cfg.periods.size(); ++i)
        require(cfg.periods[i] > cfg.periods[i - 1], "periods: must be strictly ascending");

    cfg.eps = get_real(j, "eps", "", cfg.eps);
    require(cfg.eps > 0.0 && cfg.eps < 1.0, "eps: must lie in (0, 1)");
    cfg.eta = get_real(j, "eta", "", cfg.eta);
    require(cfg.eta > 0.0, "eta: must be > 0");
    cfg.sampler_n = static_cast<int>(get_int(j, "sampler_n", "", cfg.sampler_n));
    require(cfg.sampler_n >= 1, "sampler_n: must be >= 1");

    if (j.contains("rng_seed")) {
        const auto& s = j.at("rng_seed");
        if (!s.is_number_unsigned()) throw ParseError("rng_seed: expected a nonnegative integer");
        cfg.rng_seed = s.get<std::uint64_t>();
    }

    if (j.contains("budgets")) {
        const auto& b = j.at("budgets");
        check_keys(b, {"census_seeds_per_point", "sampler_budget", "slices", "moments", "horizon", "lyapunov_samples"},
                   "budgets");
        auto& B = cfg.budgets;
        B.census_seeds_per_point = get_int(b, "census_seeds_per_point", "budgets", B.census_seeds_per_point);
        B.sampler_budget = get_int(b, "sampler_budget", "budgets", B.sampler_budget);
        B.slices = static_cast<int>(get_int(b, "slices", "budgets", B.slices));
        B.moments = static_cast<int>(get_int(b, "moments", "budgets", B.moments));
        B.horizon = static_cast<int>(get_int(b, "horizon", "budgets", B.horizon));
        B.lyapunov_samples = static_cast<int>(get_int(b, "lyapunov_samples", "budgets", B.lyapunov_samples));
    }
    const auto& B = cfg.budgets;
    require(B.census_seeds_per_point >= 1, "budgets.census_seeds_per_point: must be >= 1");
    require(B.sampler_budget >= 0, "budgets.sampler_budget: must be >= 0");
    require(B.slices >= 1, "budgets.slices: must be >= 1");
    require(B.moments >= 1, "budgets.moments: must be >= 1");
    require(B.horizon >= 1, "budgets.horizon: must be >= 1");
    require(B.lyapunov_samples >= 0, "budgets.lyapunov_samples: must be >= 0");

    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        check_keys(t, {"census", "max_root_deficit", "support", "lyapunov_buffer"}, "tolerances");
        auto& T = cfg.tolerances;
        T.census = get_real(t, "census", "tolerances", T.census);
        T.max_root_deficit = get_real(t, "max_root_deficit", "tolerances", T.max_root_deficit);
        T.support = get_real(t, "support", "tolerances", T.support);
        T.lyapunov_buffer = get_real(t, "lyapunov_buffer", "tolerances", T.lyapunov_buffer);
    }
    require(cfg.tolerances.census > 0.0, "tolerances.census: must be > 0");
    require(cfg.tolerances.max_root_deficit > 0.0, "tolerances.max_root_deficit: must be > 0");
    require(cfg.tolerances.support > 0.0, "tolerances.support: must be > 0");
    require(cfg.tolerances.lyapunov_buffer > 0.0, "tolerances.lyapunov_buffer: must be > 0");

    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) throw ParseError("output_dir: expected a string");
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    return cfg;
}

std::string csv_header(const std::string& hash) { return std::string("# version=") + kVersion + " config_hash=" + hash + "\n"; }

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

HenonMap map_from_description(const nlohmann::json& j)
{
    if (!j.is_object()) throw ParseError("map: expected an object");
    if (j.contains("quadratic")) {
        check_keys(j, {"quadratic"}, "map");
        const auto& q = j.at("quadratic");
        check_keys(q, {"a", "c"}, "map.quadratic");
        if (!q.contains("a") || !q.contains("c")) throw ParseError("map.quadratic: needs \"a\" and \"c\"");
        return HenonMap::quadratic(cx_from_json(q.at("a")), cx_from_json(q.at("c")));
    }
    check_keys(j, {"factors"}, "map");
    if (!j.contains("factors") || !j.at("factors").is_array()) throw ParseError("map.factors: expected an array");
    for (const auto& fj : j.at("factors")) check_keys(fj, {"coeffs", "a"}, "map.factors[]");
    return map_from_json(j);
}

ExperimentConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        const auto nl = text.rfind('\n', upto > 0 ? upto - 1 : 0);
        const auto col = upto - (nl == std::string::npos || nl >= upto ? 0 : nl + 1) + 1;
        throw ParseError("config line " + std::to_string(line) + " column " + std::to_string(col) + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
}

json config_to_json(const ExperimentConfig& cfg)
{
    const auto& B = cfg.budgets;
    const auto& T = cfg.tolerances;
    return {{"map", map_to_json(cfg.map)},
            {"periods", cfg.periods},
            {"eps", cfg.eps},
            {"eta", cfg.eta},
            {"sampler_n", cfg.sampler_n},
            {"budgets",
             {{"census_seeds_per_point", B.census_seeds_per_point},
              {"sampler_budget", B.sampler_budget},
              {"slices", B.slices},
              {"moments", B.moments},
              {"horizon", B.horizon},
              {"lyapunov_samples", B.lyapunov_samples}}},
            {"rng_seed", cfg.rng_seed},
            {"tolerances",
             {{"census", T.census}, {"max_root_deficit", T.max_root_deficit},
              {"support", T.support},
              {"lyapunov_buffer", T.lyapunov_buffer}}},
            {"output_dir", cfg.output_dir}};
}

std::string config_hash(const ExperimentConfig& cfg)
{
    auto j = config_to_json(cfg);
    j.erase("output_dir");
    return hash_json(j);
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return config_to_json(a) == config_to_json(b); }

json to_json(const ConvergenceReport& r)
{
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"n", row.n},
                        {"raw_mass", row.raw_mass},
                        {"moment_dist", row.moment_distance},
                        {"sw1", row.w1},
                        {"sw1_successive", row.successive}});
    return {{"rows", rows}, {"noise_floor", r.noise_floor}, {"non_monotone", r.non_monotone}};
}

json to_json(const ExperimentReport& r)
{
    json periods = json::array();
    for (const auto& p : r.periods)
        periods.push_back({{"n", p.n},
                           {"points", p.points},
                           {"saddles", p.saddles},
                           {"saddles_eps", p.saddles_eps},
                           {"raw_mass_p", p.raw_mass_p},
                           {"raw_mass_sp", p.raw_mass_sp},
                           {"raw_mass_sp_eps", p.raw_mass_sp_eps},
                           {"near_tangent", p.tangency.count_near_tangent},
                           {"tangency_fraction", p.tangency.fraction},
                           {"min_saddle_angle", p.min_saddle_angle}});
    json conv = json::object();
    for (const auto& [k, v] : r.convergence) conv[k] = to_json(v);
    json j = {{"config_hash", r.config_hash},
              {"status", r.status},
              {"periods", periods},
              {"reference", to_json(r.reference)},
              {"convergence", conv},
              {"files", r.files},
              {"notes", r.notes}};
    if (r.lyapunov) j["lyapunov"] = to_json(*r.lyapunov);
    return j;
}

ExperimentReport run_equidistribution_experiment(const ExperimentConfig& cfg, Execution exec)
{
    const HenonMap& f = cfg.map;
    const int d = f.d();
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);

    ExperimentReport rep;
    rep.config_hash = config_hash(cfg);
    rep.status = "complete";
    const RngStream root(cfg.rng_seed);
    json stages = json::array();

    auto write = [&](const std::string& name, const std::string& module, json doc, int indent = 1) {
        doc["meta"] = meta_block(module, rep.config_hash);
        write_text_file((dir / name).string(), doc.dump(indent) + "\n");
        rep.files.push_back(name);
    };
    auto write_csv = [&](const std::string& name, const std::string& body) {
        write_text_file((dir / name).string(), csv_header(rep.config_hash) + body);
        rep.files.push_back(name);
    };
    auto manifest = [&](const std::string& status) {
        json m = {{"status", status}, {"stages", stages}, {"files", rep.files}};
        m["meta"] = meta_block("lab", rep.config_hash);
        write_text_file((dir / "manifest.json").string(), m.dump(1) + "\n");
    };
    std::string stage;
    auto begin = [&](const std::string& s) { stage = s; };
    auto done = [&] { stages.push_back({{"name", stage}, {"status", "ok"}}); };

    try {
        begin("config");
        write("config.json", "lab", {{"config", config_to_json(cfg)}});
        done();

        begin("census");
        std::vector<std::pair<int, std::vector<PeriodicRecord>>> censuses;
        std::string tangency_csv = "n,points,near_tangent,fraction,min_saddle_angle\n";
        for (int n : cfg.periods) {
            const double expected = std::pow(static_cast<double>(d), n);
            const auto seeds = static_cast<std::int64_t>(cfg.budgets.census_seeds_per_point * expected);
            auto c = census(f, n, seeds, root.child("census").child(static_cast<std::uint64_t>(n)).key(),
                            cfg.tolerances.census, exec);
            classify_records(f, c.records, cfg.eps, exec);
            PeriodSummary ps;
            ps.n = n;
            ps.points = static_cast<std::int64_t>(c.records.size());
            ps.min_saddle_angle = std::numeric_limits<double>::infinity();
            for (const auto& r : c.records) {
                const bool eps_saddle = r.classification == PointClass::saddle_eps;
                const bool saddle = eps_saddle || r.classification == PointClass::saddle;
                ps.saddles += saddle;
                ps.saddles_eps += eps_saddle;
                if (saddle) ps.min_saddle_angle = std::min(ps.min_saddle_angle, r.spectral->angle_us);
            }
            if (ps.saddles == 0) ps.min_saddle_angle = 0.0;
            ps.raw_mass_p = static_cast<double>(ps.points) / expected;
            ps.raw_mass_sp = static_cast<double>(ps.saddles) / expected;
            ps.raw_mass_sp_eps = static_cast<double>(ps.saddles_eps) / expected;
            ps.tangency = tangency_statistic(c.records, cfg.eta, d);
            if (c.records.size() != static_cast<std::size_t>(expected))
                rep.notes.push_back("census n=" + std::to_string(n) + " found " + std::to_string(ps.points) +
                                    " of " + fmt(expected) + " points");

            json doc = census_to_json(f, n, c);
            doc["eps"] = cfg.eps;
            doc["tangency"] = to_json(ps.tangency);
            doc["tangency"]["eta"] = cfg.eta;
            write("census_n" + std::to_string(n) + ".json", "census", doc);
            tangency_csv += std::to_string(n) + "," + std::to_string(ps.points) + "," +
                            std::to_string(ps.tangency.count_near_tangent) + "," + fmt(ps.tangency.fraction) + "," +
                            fmt(ps.min_saddle_angle) + "\n";
            rep.periods.push_back(ps);
            censuses.emplace_back(n, std::move(c.records));
        }
        write_csv("tangency.csv", tangency_csv);
        done();

        begin("reference");
        const int sn = cfg.sampler_n;
        const auto budget = cfg.budgets.sampler_budget > 0
                                ? cfg.budgets.sampler_budget
                                : static_cast<std::int64_t>(std::pow(static_cast<double>(d), 2 * sn));
        const auto lines = default_lines(f, root.child("lines").key());
        const auto ref = sample_mu(f, sn, lines, budget, root.child("sampler").key(), exec,
                                  cfg.tolerances.support);
        rep.reference = ref.diagnostics;
        write("reference.json", "mu-sampler", sample_to_json(ref), -1);
        const bool certified = ref.measure.size() > 0 && ref.diagnostics.root_deficit <= cfg.tolerances.max_root_deficit;
        if (!certified) {
            rep.status = "non-certified";
            rep.notes.push_back("reference root_deficit " + fmt(ref.diagnostics.root_deficit) + " exceeds " +
                                fmt(cfg.tolerances.max_root_deficit));
        }
        done();

        begin("convergence");
        if (ref.measure.size() >= 2) {
            json conv = json::object();
            const double floor = noise_floor(ref.measure, std::min(cfg.budgets.slices, kNoiseSlices), kNoiseSplits,
                                             root.child("measure").key());
            for (Selector sel : {Selector::P_n, Selector::SP_n, Selector::SP_n_eps}) {
                std::vector<std::pair<int, EmpiricalMeasure>> series;
                for (const auto& [n, recs] : censuses) {
                    try {
                        series.emplace_back(n, from_census(recs, sel, n, d));
                    } catch (const EmptySelection&) {
                        rep.notes.push_back(std::string(to_string(sel)) + " empty at n=" + std::to_string(n));
                    }
                }
                if (series.empty()) continue;
                auto cr = convergence_report(series, ref.measure, cfg.budgets.moments, cfg.budgets.slices,
                                             root.child("measure").key(), floor);
                conv[to_string(sel)] = to_json(cr);
                write_csv(std::string("convergence_") + to_string(sel) + ".csv", to_csv(cr));
                rep.convergence[to_string(sel)] = std::move(cr);
            }
            write("convergence.json", "equi-metrics", conv);
        } else {
            rep.notes.push_back("convergence skipped: reference has fewer than two points");
        }
        done();

        begin("lyapunov");
        if (ref.measure.size() > 0 && cfg.budgets.lyapunov_samples > 0) {
            const auto& pts = ref.measure.points;
            const std::size_t want = std::min<std::size_t>(pts.size(), cfg.budgets.lyapunov_samples);
            std::vector<Point2> chosen;
            for (std::size_t i = 0; i < want; ++i) chosen.push_back(pts[i * pts.size() / want]);
            const auto recs =
                batch_exponents(f, chosen, cfg.budgets.horizon, true, root.child("lyapunov").key(), exec);
            const auto sum = summarize(f, recs, cfg.tolerances.lyapunov_buffer);
            json arr = json::array();
            for (const auto& r : recs) arr.push_back(to_json(r));
            write("lyapunov.json", "lyapunov", {{"records", arr}, {"summary", to_json(sum)}});
            rep.lyapunov = sum;
        } else {
            rep.notes.push_back("lyapunov skipped: no reference samples");
        }
        done();
    } catch (const std::exception& e) {
        stages.push_back({{"name", stage}, {"status", "failed"}, {"error", e.what()}});
        rep.status = "failed";
        manifest("failed");
        throw;
    }
    write("report.json", "lab", to_json(rep));
    manifest(rep.status);
    return rep;
}

}  // namespace henon
