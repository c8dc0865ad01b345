#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "henon/census.hpp"
#include "henon/escape.hpp"
#include "henon/experiment.hpp"
#include "henon/io.hpp"
#include "henon/lyapunov.hpp"
#include "henon/measure.hpp"
#include "henon/parallel.hpp"
#include "henon/rng.hpp"
#include "henon/sampler.hpp"

using namespace henon;
using nlohmann::json;

namespace {

enum Exit { ok = 0, config_error = 2, non_certified = 3, internal_error = 4 };

// arguments that determine an output, hashed into its meta block
json g_args = json::object();

HenonMap load_map_file(const std::string& path)
{
    const auto j = read_json_file(path);
    try {
        return map_from_description(j);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void emit(const std::string& out, json doc, const std::string& module)
{
    doc["meta"] = meta_block(module, hash_json(g_args));
    if (out.empty() || out == "-")
        std::cout << doc.dump(1) << "\n";
    else
        write_json_file(out, doc);
}

std::string csv_path(const std::string& out)
{
    if (out.empty() || out == "-") return "convergence.csv";
    const auto dot = out.rfind('.');
    const auto slash = out.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".csv";
    return out.substr(0, dot) + ".csv";
}

std::vector<std::string> split_commas(const std::string& s)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

// measure document, or classified census document filtered by the selector
std::pair<int, EmpiricalMeasure> load_series_entry(const std::string& path, Selector sel)
{
    const auto j = read_json_file(path);
    if (j.contains("records")) {
        const auto file = census_from_json(j);
        return {file.period, from_census(file.census.records, sel, file.period, file.map.d())};
    }
    auto m = measure_from_json(j);
    if (!m.provenance.contains("n")) throw ParseError(path + ": measure provenance has no \"n\"");
    return {m.provenance.at("n").get<int>(), std::move(m)};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Complex Henon map laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);

    std::string map_file, out, in_file, points_file, series, reference, config_file, direction = "plus";
    std::string selector = "SP_n_eps";
    std::uint64_t seed = 1;
    int period = 1, n = 1, moments_order = 4, slices = 256, horizon = kDefaultHorizon;
    std::int64_t seeds = 0, budget = 0;
    double tol = -1.0, eps = 0.1, eta = 0.05, support = kSupportTol, delta = 0.2;
    bool no_shadow = false;
    std::vector<int> powers{2, 4, 16, 256, 65536};

    auto* census_cmd = app.add_subcommand("census", "periodic points of period n");
    census_cmd->add_option("--map", map_file, "map description (JSON)")->required();
    census_cmd->add_option("--period", period)->required()->check(CLI::PositiveNumber);
    census_cmd->add_option("--seeds", seeds, "starting orbits (default 16 d^n)");
    census_cmd->add_option("--rng-seed", seed);
    census_cmd->add_option("--tol", tol, "Newton acceptance tolerance (default 1e-9)");
    census_cmd->add_option("--out", out);

    auto* classify_cmd = app.add_subcommand("classify", "spectral data and saddle classes for a census file");
    classify_cmd->add_option("--in", in_file)->required();
    classify_cmd->add_option("--eps", eps);
    classify_cmd->add_option("--eta", eta);
    classify_cmd->add_option("--out", out);

    auto* sample_cmd = app.add_subcommand("sample-mu", "equilibrium measure samples from line intersections");
    sample_cmd->add_option("--map", map_file)->required();
    sample_cmd->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    sample_cmd->add_option("--budget", budget, "root searches (default d^(2n))");
    sample_cmd->add_option("--rng-seed", seed);
    sample_cmd->add_option("--support", support, "G threshold for the support check");
    sample_cmd->add_option("--out", out);

    auto* equi_cmd = app.add_subcommand("equidist", "convergence of a measure series to a reference");
    equi_cmd->add_option("--series", series, "comma separated measure or classified census files")->required();
    equi_cmd->add_option("--reference", reference)->required();
    equi_cmd->add_option("--selector", selector, "P_n, SP_n or SP_n_eps for census files");
    equi_cmd->add_option("--moments", moments_order)->check(CLI::PositiveNumber);
    equi_cmd->add_option("--slices", slices)->check(CLI::PositiveNumber);
    equi_cmd->add_option("--rng-seed", seed);
    equi_cmd->add_option("--out", out);

    auto* lyap_cmd = app.add_subcommand("lyapunov", "finite-time Lyapunov exponents");
    lyap_cmd->add_option("--map", map_file)->required();
    lyap_cmd->add_option("--points", points_file)->required();
    lyap_cmd->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
    lyap_cmd->add_option("--rng-seed", seed);
    lyap_cmd->add_flag("--no-shadow", no_shadow, "fail on escaping orbits instead of shadowing");
    lyap_cmd->add_option("--out", out);

    auto* green_cmd = app.add_subcommand("green", "Green function values");
    green_cmd->add_option("--map", map_file)->required();
    green_cmd->add_option("--points", points_file)->required();
    green_cmd->add_option("--direction", direction)->check(CLI::IsMember({"plus", "minus"}));
    green_cmd->add_option("--tol", tol, "default 1e-10");
    green_cmd->add_option("--out", out);

    auto* run_cmd = app.add_subcommand("run", "full equidistribution pipeline");
    run_cmd->add_option("--config", config_file)->required();
    run_cmd->add_option("--rng-seed", seed, "overrides rng_seed");
    run_cmd->add_option("--out", out, "overrides output_dir");

    auto* fix_cmd = app.add_subcommand("fixtures", "graph mass ratios for x -> x^m");
    fix_cmd->add_option("--delta", delta);
    fix_cmd->add_option("--powers", powers)->delimiter(',');
    fix_cmd->add_option("--out", out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_error;
    }

    try {
        set_thread_count(threads);
        auto* cmd = app.get_subcommands().front();
        g_args = {{"command", cmd->get_name()}};
        for (const auto* opt : cmd->get_options())
            if (opt->count() > 0 && opt->get_name() != "--out" && opt->get_name() != "--help")
                g_args[opt->get_name()] = opt->as<std::string>();

        if (cmd == census_cmd) {
            const auto f = load_map_file(map_file);
            if (seeds == 0) seeds = 16 * static_cast<std::int64_t>(std::pow(static_cast<double>(f.d()), period));
            if (seeds < 1) throw ParseError("--seeds must be >= 1");
            const auto c = census(f, period, seeds, seed, tol > 0 ? tol : kDefaultCensusTol);
            emit(out, census_to_json(f, period, c), "census");
        } else if (cmd == classify_cmd) {
            if (!(eps > 0.0 && eps < 1.0)) throw ParseError("--eps must lie in (0, 1)");
            if (!(eta > 0.0)) throw ParseError("--eta must be > 0");
            auto doc = read_json_file(in_file);
            doc.erase("meta");
            classify_census_json(doc, eps, eta);
            emit(out, doc, "saddle-classify");
        } else if (cmd == sample_cmd) {
            const auto f = load_map_file(map_file);
            if (budget == 0) budget = static_cast<std::int64_t>(std::pow(static_cast<double>(f.d()), 2 * n));
            if (budget < 1) throw ParseError("--budget must be >= 1");
            if (!(support > 0.0)) throw ParseError("--support must be > 0");
            const RngStream root(seed);
            const auto r = sample_mu(f, n, default_lines(f, root.child("lines").key()), budget,
                                     root.child("sampler").key(), Execution::parallel, support);
            emit(out, sample_to_json(r), "mu-sampler");
            if (r.diagnostics.root_deficit > kCertifyingDeficit) {
                std::fprintf(stderr, "non-certified: root_deficit %.4g > %.2g\n", r.diagnostics.root_deficit,
                             kCertifyingDeficit);
                return Exit::non_certified;
            }
        } else if (cmd == equi_cmd) {
            const Selector sel = selector_from_string(selector);
            std::vector<std::pair<int, EmpiricalMeasure>> entries;
            for (const auto& path : split_commas(series)) entries.push_back(load_series_entry(path, sel));
            if (entries.empty()) throw ParseError("--series is empty");
            const auto ref = measure_from_json(read_json_file(reference));
            validate(ref);
            const auto rep = convergence_report(entries, ref, moments_order, slices,
                                                RngStream(seed).child("measure").key());
            emit(out, to_json(rep), "equi-metrics");
            write_text_file(csv_path(out), std::string("# version=") + kVersion + " config_hash=" +
                                               hash_json(g_args) + "\n" + to_csv(rep));
        } else if (cmd == lyap_cmd) {
            const auto f = load_map_file(map_file);
            const auto pts = points_from_json(read_json_file(points_file));
            const auto recs = batch_exponents(f, pts, horizon, !no_shadow, seed);
            json arr = json::array();
            for (const auto& r : recs) arr.push_back(to_json(r));
            emit(out, {{"records", arr}, {"summary", to_json(summarize(f, recs))}}, "lyapunov");
        } else if (cmd == green_cmd) {
            const auto f = load_map_file(map_file);
            const auto pts = points_from_json(read_json_file(points_file));
            const Direction dir = direction == "plus" ? Direction::forward : Direction::backward;
            const double t = tol > 0 ? tol : 1e-10;
            json arr = json::array();
            for (const auto& z : pts) {
                json rec = {{"point", point_to_json(z)}};
                try {
                    rec.update(to_json(green(f, z, dir, t)));
                } catch (const MaxDepthExceeded& e) {
                    rec["error"] = e.what();
                }
                arr.push_back(rec);
            }
            emit(out, {{"direction", direction}, {"tol", t}, {"records", arr}}, "escape-green");
        } else if (cmd == run_cmd) {
            std::ifstream in(config_file);
            if (!in) throw ParseError("cannot open " + config_file);
            std::stringstream ss;
            ss << in.rdbuf();
            auto cfg = parse_config(ss.str());
            if (run_cmd->count("--rng-seed")) cfg.rng_seed = seed;
            if (!out.empty()) cfg.output_dir = out;
            const auto rep = run_equidistribution_experiment(cfg);
            std::printf("status %s, config_hash %s, output %s\n", rep.status.c_str(), rep.config_hash.c_str(),
                        cfg.output_dir.c_str());
            for (const auto& note : rep.notes) std::printf("note: %s\n", note.c_str());
            if (rep.status == "non-certified") return Exit::non_certified;
        } else if (cmd == fix_cmd) {
            if (!(delta > 0.0 && delta < 1.0)) throw ParseError("--delta must lie in (0, 1)");
            json rows = json::array();
            for (int m : powers) {
                if (m < 1) throw ParseError("--powers must be >= 1");
                rows.push_back({{"d_power", m}, {"ratio", pathological_graph_mass_ratio(m, delta)}});
            }
            emit(out,
                 {{"delta", delta},
                  {"identity", pathological_graph_mass_ratio(1, delta)},
                  {"identity_closed_form", (1.0 - delta) * (1.0 - delta)},
                  {"ratios", rows}},
                 "equi-metrics");
        }
        return Exit::ok;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Exit::config_error;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Exit::config_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return Exit::internal_error;
    }
}
