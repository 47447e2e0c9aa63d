#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracle.hpp"
#include "shpo/error.hpp"
#include "shpo/experiment.hpp"

using namespace shpo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("shpo_test_" + name);
    fs::remove_all(dir);
    return dir;
}

ExperimentConfig config_of(const std::string& text) { return parse_experiment_config(text); }

} // namespace

TEST_CASE("config round trip")
{
    const char* texts[] = {
        R"({"objective":{"kind":"hierarchical","n":12,"noise":0.5,"seed":4},
            "optimizer":{"kind":"harmonica","seed":2,"stages":2,"restriction_size":3,"collapse_cap":16,
                         "psr":{"samples":120,"lambda":0.5},"base":{"kind":"sh","arms":9,"eta":3,"max_resource":9}},
            "replications":2,"parallel":3})",
        R"({"objective":{"kind":"sparse","n":9,"sparsity":3,"degree":2,"coeff_low":0.5,"coeff_high":1.5,"seed":1},
            "optimizer":{"kind":"random","budget":17,"seed":11}})",
        R"({"objective":{"kind":"tree","n":9,"depth":2,"leaf_range":3,"boolean_leaves":false,"seed":1},
            "optimizer":{"kind":"hyperband","max_resource":27,"eta":3}})",
        R"({"objective":{"kind":"spec","path":"/tmp/x.json"},
            "optimizer":{"kind":"harmonica-1","fill":"minus","psr":{"seed":3,"exclude_constant":false}}})",
        R"({"objective":{"kind":"hierarchical"},"optimizer":{"kind":"sh","arms":4,"eta":2,"min_resource":2,"max_resource":16}})",
    };
    for (const char* text : texts) {
        const auto c = config_of(text);
        const auto again = config_of(serialize_experiment_config(c));
        CHECK(again == c);
        CHECK(serialize_experiment_config(again) == serialize_experiment_config(c));
    }
    const auto c = config_of(texts[0]);
    CHECK(c.optimizer.base.kind == BaseKind::successive_halving);
    CHECK(c.optimizer.psr.samples == 120);
    CHECK(c.parallel == 3);
}

TEST_CASE("config errors name the line or the field")
{
    try {
        config_of("{\n\"objective\": {\"kind\": \"sparse\"},\n  \"optimizer\": {,}\n}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
        config_of(R"({"objective":{"kind":"sparse","n":8},"optimizer":{"kind":"harmonica","psr":{"sampels":10}}})");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("optimizer.psr.sampels") != std::string::npos);
    }
    try {
        config_of(R"({"objective":{"kind":"sparse","n":"8"},"optimizer":{"kind":"random"}})");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("objective.n") != std::string::npos);
    }
    CHECK_THROWS_AS(config_of(R"({"objective":{"kind":"cubic"},"optimizer":{"kind":"random"}})"), ParseError);
    CHECK_THROWS_AS(config_of(R"({"optimizer":{"kind":"random"}})"), ParseError);
    CHECK_THROWS_AS(config_of(R"({"objective":{"kind":"sparse"},"optimizer":{"kind":"random"},"replications":0})"),
                    ParseError);
    CHECK_THROWS_AS(config_of(R"({"objective":{"kind":"sparse","n":-3},"optimizer":{"kind":"random"}})"), ParseError);
}

TEST_CASE("random search runs are byte-identical")
{
    const auto c = config_of(R"({"objective":{"kind":"hierarchical","n":10,"noise":1,"seed":3},
                                "optimizer":{"kind":"random","budget":10,"seed":8}})");
    const auto a = scratch("rs_a"), b = scratch("rs_b");
    run_experiment(c, a);
    run_experiment(c, b);
    CHECK(slurp(a / "evaluations.csv") == slurp(b / "evaluations.csv"));
    const std::string csv = slurp(a / "evaluations.csv");
    CHECK(csv.rfind("replication,stage,sample_index,resource,config,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    CHECK(verify_run(a).ok);
}

TEST_CASE("replications are summarised")
{
    const auto c = config_of(R"({"objective":{"kind":"sparse","n":10,"sparsity":4,"seed":3},
                                "optimizer":{"kind":"random","budget":12,"seed":1},"replications":3})");
    const auto dir = scratch("reps");
    const auto summary = run_experiment(c, dir);
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    REQUIRE(j["replications"].size() == 3);
    double lo = 1e300, sum = 0;
    for (const auto& r : j["replications"]) {
        lo = std::min(lo, r["best_value"].get<double>());
        sum += r["best_value"].get<double>();
    }
    CHECK(j["aggregate"]["min"].get<double>() == lo);
    CHECK(j["aggregate"]["mean"].get<double>() == sum / 3);
    CHECK(j["best_value"].get<double>() == lo);
    CHECK(j["total_evaluations"].get<int>() == 36);
    CHECK(summary.replications.size() == 3);
    CHECK(verify_run(dir).ok);
}

TEST_CASE("staged runs write a feature table")
{
    const auto c = config_of(R"({"objective":{"kind":"hierarchical","n":14,"noise":0,"seed":5},
                                "optimizer":{"kind":"harmonica","seed":6,"stages":2}})");
    const auto dir = scratch("staged");
    run_experiment(c, dir);
    const auto stages = nlohmann::json::parse(slurp(dir / "stages.json"));
    const auto& first = stages["replications"][0]["stages"][0];
    CHECK(first["stage"] == 1);
    CHECK(first["features"].size() <= 5);
    CHECK(first["features"].size() >= 1);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["stages"][0]["features"][0].contains("indices"));
    CHECK(summary["stages"][0]["features"][0].contains("weight"));
    CHECK(verify_run(dir).ok);
}

TEST_CASE("verification catches edited summaries and logs")
{
    for (const char* optimizer : {R"({"kind":"sh","arms":8,"eta":2,"max_resource":8,"seed":2})",
                                  R"({"kind":"hyperband","max_resource":9,"eta":3,"seed":2})",
                                  R"({"kind":"harmonica-1","psr":{"samples":60}})"}) {
        const auto c = config_of(std::string(R"({"objective":{"kind":"hierarchical","n":10,"noise":2,"seed":1},"optimizer":)") +
                                 optimizer + R"(,"replications":2})");
        const auto dir = scratch("verify");
        run_experiment(c, dir);
        CAPTURE(optimizer);
        const auto report = verify_run(dir);
        CHECK(report.ok);
        for (const auto& p : report.problems) MESSAGE(p);

        auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
        j["total_resource"] = j["total_resource"].get<long long>() + 1;
        std::ofstream(dir / "summary.json") << j.dump(2);
        CHECK_FALSE(verify_run(dir).ok);
    }

    const auto c = config_of(R"({"objective":{"kind":"sparse","n":8,"sparsity":2,"seed":1},
                                "optimizer":{"kind":"random","budget":5}})");
    const auto dir = scratch("verify_csv");
    run_experiment(c, dir);
    std::string csv = slurp(dir / "evaluations.csv");
    const auto comma = csv.rfind(',');
    csv = csv.substr(0, comma + 1) + "-1000\n";
    std::ofstream(dir / "evaluations.csv") << csv;
    CHECK_FALSE(verify_run(dir).ok);
}

TEST_CASE("artifacts do not depend on the worker count")
{
    for (const char* optimizer : {R"({"kind":"harmonica","seed":3,"stages":2,"psr":{"samples":120},"base":{"kind":"hyperband","max_resource":9,"eta":3}})",
                                  R"({"kind":"sh","arms":16,"eta":2,"max_resource":8})",
                                  R"({"kind":"random","budget":100})"}) {
        auto c = config_of(std::string(R"({"objective":{"kind":"hierarchical","n":12,"noise":1,"seed":7},"optimizer":)") +
                           optimizer + "}");
        c.parallel = 1;
        const auto a = scratch("width1");
        run_experiment(c, a);
        c.parallel = 4;
        const auto b = scratch("width4");
        run_experiment(c, b);
        CHECK(slurp(a / "evaluations.csv") == slurp(b / "evaluations.csv"));
        if (fs::exists(a / "stages.json")) CHECK(slurp(a / "stages.json") == slurp(b / "stages.json"));
    }
}

TEST_CASE("objective specs reload to the same function")
{
    for (const char* text : {R"({"kind":"hierarchical","n":10,"noise":0.5,"seed":3})",
                             R"({"kind":"sparse","n":10,"sparsity":4,"degree":2,"seed":3})",
                             R"({"kind":"tree","n":10,"depth":3,"seed":3})"}) {
        const auto built = build_objective(parse_objective_config(text));
        const auto dir = scratch("spec");
        const std::string spec = gen_objective(parse_objective_config(text), dir);
        const auto loaded = load_objective_spec(slurp(dir / "objective.json"));
        CHECK(spec == slurp(dir / "objective.json"));
        for (std::uint64_t r = 0; r < 1024; r += 13) {
            const auto x = Configuration::from_lex_rank(r, 10);
            CHECK(loaded.objective->evaluate(x, r) == built.objective->evaluate(x, r));
        }
    }
    CHECK_THROWS_AS(load_objective_spec(R"({"kind":"tree","n":3,"nodes":[{"variable":0,"plus":1,"minus":5}]})"), Error);
}

TEST_CASE("bare recovery writes its artifacts")
{
    const auto c = parse_recover_config(
        R"({"objective":{"kind":"sparse","n":10,"sparsity":3,"degree":2,"seed":4},"psr":{"samples":150,"sparsity":3,"lambda":0.05,"seed":2}})");
    const auto dir = scratch("recover");
    const auto j = nlohmann::json::parse(run_recover(c, dir));
    CHECK(j["features"].size() == 3);
    CHECK(j["estimation_error"].get<double>() <= 1e-2);
    CHECK(fs::exists(dir / "samples.csv"));
}

TEST_CASE("noise sweep")
{
    SweepConfig c = parse_sweep_config(
        R"({"objective":{"kind":"hierarchical","n":10,"seed":1},"psr":{"samples":200},"levels":[0,1,2,4],"seeds":3})");
    const auto dir = scratch("sweep");
    const auto r = noise_sweep(c, dir);
    CHECK(r.rows.size() == 12);
    // The penalty shrinks each coefficient by about lambda / 2T, so the
    // noiseless bound needs plenty of samples.
    SweepConfig clean = c;
    clean.levels = {0.0};
    clean.psr.samples = 2000;
    for (const auto& row : noise_sweep(clean).rows) CHECK(row.error <= 1e-3);
    std::vector<double> levels{0, 1, 2, 4};
    CHECK(r.fit.correlation == doctest::Approx(oracle::pearson(levels, r.mean_error)));
    CHECK(r.mean_error[3] >= 1.5 * r.mean_error[2]);
    CHECK(fs::exists(dir / "sweep.csv"));
    CHECK(fs::exists(dir / "fit.json"));

    c.objective.n = 21;
    CHECK_THROWS_AS(noise_sweep(c), LimitError);
}

TEST_CASE("line fit")
{
    const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.correlation == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_line({1}, {2}), InputError);
}
