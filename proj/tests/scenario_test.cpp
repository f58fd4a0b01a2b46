#include <doctest.h>

#include <fstream>

#include "fvsim/scenario.hpp"

using namespace fvsim;

namespace {

std::filesystem::path temp_dir(const std::string& stem) {
    auto p = std::filesystem::temp_directory_path() / ("fvsim_test_" + stem);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Json base_fv_scenario() {
    return Json{
        {"experiment", "fv-run"},
        {"domain", {{"type", "interval"}, {"a", 0.0}, {"b", 1.0}}},
        {"model", {{"name", "brownian"}, {"params", {{"dim", 1}}}}},
        {"init", {{"type", "uniform"}}},
        {"seed", 11},
        {"dt", 1e-3},
        {"n_particles", 100},
        {"t_end", 0.2},
        {"checkpoints", {0.1, 0.2}},
    };
}

}  // namespace

TEST_CASE("parse_scenario: schema violations are rejected") {
    CHECK_THROWS_AS((void)parse_scenario(Json{{"experiment", "fv-run"}}), ScenarioError);

    Json bad_kind = base_fv_scenario();
    bad_kind["experiment"] = "nope";
    CHECK_THROWS_AS((void)parse_scenario(bad_kind), ScenarioError);

    Json bad_domain = base_fv_scenario();
    bad_domain["domain"] = {{"type", "cube"}};
    CHECK_THROWS_AS((void)parse_scenario(bad_domain), ScenarioError);

    Json bad_model = base_fv_scenario();
    bad_model["model"] = {{"name", "not_a_model"}};
    CHECK_THROWS_AS((void)parse_scenario(bad_model), std::invalid_argument);

    Json bad_cp = base_fv_scenario();
    bad_cp["checkpoints"] = {0.2, 0.1};
    CHECK_THROWS_AS((void)parse_scenario(bad_cp), ScenarioError);

    Json bad_dt = base_fv_scenario();
    bad_dt["dt"] = -1.0;
    CHECK_THROWS_AS((void)parse_scenario(bad_dt), ScenarioError);
}

TEST_CASE("run_scenario: fv-run writes clouds, log and summary") {
    Json j = base_fv_scenario();
    const auto dir = temp_dir("fvrun");
    j["out_dir"] = dir.string();
    const RunResult r = run_scenario(parse_scenario(j));
    REQUIRE(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir / "cloud_0.csv"));
    CHECK(std::filesystem::exists(dir / "cloud_1.csv"));
    CHECK(std::filesystem::exists(dir / "rebirth_log.csv"));
    CHECK(std::filesystem::exists(dir / "summary.json"));
    CHECK(std::filesystem::exists(dir / "resolved_scenario.json"));
    CHECK(r.summary["checkpoints"].size() == 2);
    CHECK(r.summary["scenario"]["seed"].get<uint64_t>() == 11);
}

TEST_CASE("run_scenario: reruns are byte-identical, including across worker counts") {
    Json j = base_fv_scenario();
    const auto d1 = temp_dir("det1");
    const auto d2 = temp_dir("det2");
    const auto d3 = temp_dir("det3");
    j["out_dir"] = d1.string();
    REQUIRE(run_scenario(parse_scenario(j)).exit_code == 0);
    j["out_dir"] = d2.string();
    REQUIRE(run_scenario(parse_scenario(j)).exit_code == 0);
    j["out_dir"] = d3.string();
    j["workers"] = 4;
    REQUIRE(run_scenario(parse_scenario(j)).exit_code == 0);

    for (const char* f : {"cloud_0.csv", "cloud_1.csv", "rebirth_log.csv"}) {
        CHECK(slurp(d1 / f) == slurp(d2 / f));
        CHECK(slurp(d1 / f) == slurp(d3 / f));
    }
}

TEST_CASE("run_scenario: seed override changes outputs") {
    Json j = base_fv_scenario();
    const auto d1 = temp_dir("seed1");
    const auto d2 = temp_dir("seed2");
    j["out_dir"] = d1.string();
    REQUIRE(run_scenario(parse_scenario(j)).exit_code == 0);
    j["out_dir"] = d2.string();
    ScenarioOverrides ov;
    ov.seed = 999;
    REQUIRE(run_scenario(parse_scenario(j, ov)).exit_code == 0);
    CHECK(slurp(d1 / "cloud_0.csv") != slurp(d2 / "cloud_0.csv"));
}

TEST_CASE("run_scenario: check-model passes for brownian") {
    Json j{
        {"experiment", "check-model"},
        {"domain", {{"type", "interval"}, {"a", 0.0}, {"b", 1.0}}},
        {"model", {{"name", "brownian"}, {"params", {{"dim", 1}}}}},
        {"validator_samples", 2000},
        {"out_dir", temp_dir("check").string()},
    };
    const RunResult r = run_scenario(parse_scenario(j));
    CHECK(r.exit_code == 0);
    CHECK(r.summary["validators"]["periodicity_pass"].get<bool>());
    CHECK(r.summary["validators"]["ellipticity_pass"].get<bool>());
    CHECK(r.summary["validators"]["kill_rate_pass"].get<bool>());
    CHECK(r.summary["validators"]["joint_covariance_pass"].get<bool>());
    CHECK_FALSE(r.summary["validators"]["hard_fail"].get<bool>());
}

TEST_CASE("run_scenario: insufficient survivors surfaces as a machine-readable error") {
    Json j{
        {"experiment", "conditioned-mc"},
        {"domain", {{"type", "interval"}, {"a", 0.0}, {"b", 1.0}}},
        {"model", {{"name", "brownian_softkill"}, {"params", {{"dim", 1}, {"rate", 60.0}}}}},
        {"init", {{"type", "point"}, {"x", {0.5}}}},
        {"dt", 1e-2},
        {"checkpoints", {1.0}},
        {"target_survivors", 1000},
        {"max_replicas", 2000},
        {"out_dir", temp_dir("insuff").string()},
    };
    const RunResult r = run_scenario(parse_scenario(j));
    CHECK(r.exit_code == 2);
    CHECK(r.summary["error"]["type"] == "insufficient_survivors");
    CHECK(r.summary["error"].contains("achieved"));
}

TEST_CASE("run_scenario: n_particles = 1 is rejected") {
    Json j = base_fv_scenario();
    j["n_particles"] = 1;
    j["out_dir"] = temp_dir("n1").string();
    const RunResult r = run_scenario(parse_scenario(j));
    CHECK(r.exit_code != 0);
    CHECK(r.summary.contains("error"));
}

TEST_CASE("mixing-curve: exact synthetic check via tiny run") {
    // two identical point inits: TV stays at the noise floor and the fit
    // must report insufficient points above it
    Json j{
        {"experiment", "mixing-curve"},
        {"domain", {{"type", "interval"}, {"a", 0.0}, {"b", 1.0}}},
        {"model", {{"name", "brownian"}, {"params", {{"dim", 1}}}}},
        {"init", {{"type", "point"}, {"x", {0.5}}}},
        {"init2", {{"type", "point"}, {"x", {0.5}}}},
        {"dt", 2e-3},
        {"checkpoints", {0.05, 0.1, 0.15}},
        {"target_survivors", 400},
        {"max_replicas", 20000},
        {"bins", 10},
        {"out_dir", temp_dir("mixsame").string()},
    };
    const RunResult r = run_scenario(parse_scenario(j));
    CHECK(r.exit_code == 2);  // insufficient points above the noise floor
    CHECK(std::filesystem::exists(std::filesystem::path(j["out_dir"].get<std::string>()) /
                                  "tv_curve.csv"));
}

TEST_CASE("list/describe text surfaces") {
    const std::string listing = list_models_text();
    for (const char* name : {"remark1_1", "remark1_2", "remark1_3", "remark1_4"})
        CHECK(listing.find(name) != std::string::npos);
    CHECK(describe_model_text("remark1_3").find("time-periodic") != std::string::npos);
    CHECK_THROWS_AS((void)describe_model_text("unknown_model"), std::invalid_argument);
}
