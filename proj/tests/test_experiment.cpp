#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "henon/experiment.hpp"
#include "henon/io.hpp"

using namespace henon;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("henon_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing")
{
    const auto cfg = parse_config(R"({"map": {"quadratic": {"a": 1, "c": -10}}, "periods": [1, 2]})");
    CHECK(cfg.periods == std::vector<int>{1, 2});
    CHECK(cfg.eps == 0.1);
    CHECK(cfg.eta == 0.05);
    CHECK(cfg.sampler_n == 10);
    CHECK(cfg.rng_seed == 1);
    CHECK(cfg.budgets.slices == 256);
    CHECK(cfg.tolerances.max_root_deficit == 0.05);
    CHECK(cfg.map.d() == 2);

    // defaults are embedded in the effective config
    const auto eff = config_to_json(cfg);
    CHECK(eff.at("budgets").at("horizon") == 200);
    CHECK(eff.at("tolerances").at("census") == 1e-9);

    // round trip
    const auto back = parse_config(eff.dump());
    CHECK(back == cfg);
    CHECK(config_hash(back) == config_hash(cfg));

    // hash ignores whitespace and output_dir, not values
    const auto spaced = parse_config("{ \"periods\" : [1,2],\n \"map\":{\"quadratic\":{\"c\":-10,\"a\":1}},"
                                     " \"output_dir\": \"elsewhere\" }");
    CHECK(config_hash(spaced) == config_hash(cfg));
    CHECK_FALSE(spaced == cfg);
    auto other = cfg;
    other.eps = 0.2;
    CHECK(config_hash(other) != config_hash(cfg));

    // factor form
    const auto g = parse_config(
        R"({"map": {"factors": [{"coeffs": [-10, 0], "a": [1, 0]}]}, "periods": [3], "eps": 0.3})");
    CHECK(g.map.d() == 2);
    CHECK(g.eps == 0.3);
}

TEST_CASE("config errors name the field")
{
    auto msg = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    const std::string map = R"("map": {"quadratic": {"a": 1, "c": -10}})";
    CHECK(msg("{" + map + R"(, "periods": [1], "eps": 1.5})").find("eps") != std::string::npos);
    CHECK(msg("{" + map + R"(, "periods": [1], "eps": 0})").find("eps") != std::string::npos);
    CHECK(msg("{" + map + R"(, "periods": [1], "bogus": 1})").find("bogus") != std::string::npos);
    CHECK(msg("{" + map + R"(, "periods": [1], "budgets": {"slice": 3}})").find("budgets") != std::string::npos);
    CHECK(msg("{" + map + R"(, "periods": [2, 1]})").find("periods") != std::string::npos);
    CHECK(msg("{" + map + R"(, "periods": []})").find("periods") != std::string::npos);
    CHECK(msg(R"({"periods": [1]})").find("map") != std::string::npos);
    CHECK(msg("{" + map + "}").find("periods") != std::string::npos);
    CHECK(msg("{" + map + R"(, "periods": [1], "rng_seed": -1})").find("rng_seed") != std::string::npos);
    CHECK(msg("{" + map + R"(, "periods": [1], "tolerances": {"census": 0}})").find("tolerances.census") !=
          std::string::npos);
    CHECK(msg("{\n  \"periods\": [1,\n  ]\n}").find("line 3") != std::string::npos);
}

TEST_CASE("census documents round trip")
{
    const auto f = HenonMap::quadratic(1.0, -1.0);
    auto c = census(f, 1, 16, 3);
    auto doc = census_to_json(f, 1, c);
    const auto file = census_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(file.period == 1);
    REQUIRE(file.census.records.size() == c.records.size());
    for (std::size_t i = 0; i < c.records.size(); ++i) CHECK(file.census.records[i].point == c.records[i].point);

    classify_census_json(doc, 0.1, 0.05, Execution::serial);
    int eps_saddles = 0;
    for (const auto& r : doc.at("records")) {
        REQUIRE(r.contains("classification"));
        REQUIRE(r.contains("eigen_log_moduli"));
        if (r.at("classification") == "saddle_eps") {
            ++eps_saddles;
            CHECK(std::exp(r.at("eigen_log_moduli").at(0).get<double>()) == doctest::Approx(4.611).epsilon(2e-4));
            CHECK(std::exp(r.at("eigen_log_moduli").at(1).get<double>()) == doctest::Approx(0.2168).epsilon(5e-4));
        }
    }
    CHECK(eps_saddles == 1);
    CHECK(doc.at("tangency").at("eta") == 0.05);
    const auto again = census_from_json(doc);
    CHECK(again.census.records[0].classification.has_value());

    CHECK(points_from_json(doc).size() == c.records.size());
    CHECK_THROWS_AS(points_from_json(nlohmann::json{{"x", 1}}), ParseError);
    CHECK_THROWS_AS(census_from_json(nlohmann::json{{"map", 1}}), ParseError);
}

TEST_CASE("pipeline run is reproducible and stamped")
{
    auto cfg = parse_config(
        R"({"map": {"quadratic": {"a": 1, "c": -10}}, "periods": [1, 2, 3, 4], "sampler_n": 4,
            "budgets": {"slices": 32, "lyapunov_samples": 16, "horizon": 60},
            "tolerances": {"support": 1.0}})");
    const auto a = scratch("run");
    cfg.output_dir = a.string();
    const auto rep = run_equidistribution_experiment(cfg, Execution::parallel);
    std::map<std::string, std::string> first;
    for (const auto& name : rep.files) first[name] = slurp(a / name);
    const auto first_manifest = slurp(a / "manifest.json");
    const auto rep2 = run_equidistribution_experiment(cfg, Execution::serial);
    CHECK(rep2.files == rep.files);

    CHECK(rep.status == "complete");
    CHECK(rep.config_hash == config_hash(cfg));
    REQUIRE(rep.periods.size() == 4);
    for (const auto& p : rep.periods) CHECK(p.points == (1 << p.n));
    CHECK(rep.reference.root_deficit <= 0.05);
    REQUIRE(rep.lyapunov.has_value());
    CHECK(rep.lyapunov->sum_law_error < 1e-10);
    CHECK(rep.convergence.count("SP_n_eps") == 1);

    REQUIRE(fs::exists(a / "manifest.json"));
    for (const auto& name : rep.files) {
        INFO(name);
        const auto text = slurp(a / name);
        CHECK(text == first[name]);
        CHECK(text.find(rep.config_hash) != std::string::npos);
        CHECK(text.find(kVersion) != std::string::npos);
    }
    CHECK(slurp(a / "manifest.json") == first_manifest);
    const auto manifest = read_json_file((a / "manifest.json").string());
    CHECK(manifest.at("status") == "complete");
    CHECK(manifest.at("stages").size() == 5);
    const auto saved = read_json_file((a / "config.json").string());
    CHECK(parse_config(saved.at("config").dump()) == cfg);
    fs::remove_all(a);
}

TEST_CASE("pipeline on the worked map and failure manifest")
{
    auto cfg = parse_config(
        R"({"map": {"quadratic": {"a": 1, "c": -1}}, "periods": [1], "sampler_n": 3,
            "budgets": {"slices": 16, "lyapunov_samples": 4, "horizon": 40}})");
    const auto dir = scratch("worked");
    cfg.output_dir = dir.string();
    const auto rep = run_equidistribution_experiment(cfg);
    CHECK((rep.status == "complete" || rep.status == "non-certified"));
    REQUIRE(rep.periods.size() == 1);
    CHECK(rep.periods[0].points == 2);
    CHECK(rep.periods[0].saddles_eps == 1);
    const auto doc = read_json_file((dir / "census_n1.json").string());
    CHECK(doc.at("meta").at("module") == "census");
    fs::remove_all(dir);

    // a stage that cannot write its output fails and leaves a manifest behind
    const auto bad = scratch("failed");
    fs::create_directories(bad / "census_n1.json");
    cfg.output_dir = bad.string();
    CHECK_THROWS(run_equidistribution_experiment(cfg));
    const auto manifest = read_json_file((bad / "manifest.json").string());
    CHECK(manifest.at("status") == "failed");
    CHECK(manifest.at("stages").back().at("name") == "census");
    CHECK(manifest.at("stages").back().at("status") == "failed");
    fs::remove_all(bad);
}
