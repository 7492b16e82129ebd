#include <catch2/catch_amalgamated.hpp>

#include "smo/run_config.hpp"

using namespace smo;

TEST_CASE("minimal config parses with defaults", "[run_config]") {
    const json j = {{"objective", "sphere"}, {"output_dir", "out"}};
    const RunConfig cfg = parse_run_config(j);
    REQUIRE(cfg.objective == "sphere");
    REQUIRE(cfg.seed == 0);
    REQUIRE(cfg.smo.population_size == 40);
    REQUIRE(!cfg.space.has_value());
}

TEST_CASE("unknown keys are rejected at every level", "[run_config]") {
    REQUIRE_THROWS_AS(parse_run_config({{"objective", "sphere"}, {"bogus", 1}}), ConfigError);
    REQUIRE_THROWS_AS(
        parse_run_config({{"objective", "sphere"}, {"smo", {{"popsize", 10}}}}),
        ConfigError);
    REQUIRE_THROWS_AS(
        parse_run_config(
            {{"objective", "sphere"},
             {"space", json::array({{{"name", "x"}, {"kind", "continuous"}, {"lo", 0},
                                     {"hi", 1}, {"wat", true}}})}}),
        ConfigError);
}

TEST_CASE("field type errors name the offending field", "[run_config]") {
    try {
        parse_run_config({{"objective", "sphere"}, {"seed", "seven"}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("seed") != std::string::npos);
    }
}

TEST_CASE("space declarations cover the three kinds", "[run_config]") {
    const json j = {
        {"objective", "sphere"},
        {"space",
         json::array(
             {{{"name", "lr"}, {"kind", "continuous"}, {"lo", 1e-5}, {"hi", 1e-2},
               {"log_scale", true}},
              {{"name", "epochs"}, {"kind", "discrete"}, {"lo", 10}, {"hi", 100}},
              {{"name", "batch"}, {"kind", "categorical"},
               {"choices", json::array({4, 8, 16, 32, 64, 128})}}})}};
    const RunConfig cfg = parse_run_config(j);
    REQUIRE(cfg.space.has_value());
    REQUIRE(cfg.space->dim() == 3);
    REQUIRE(std::get<ContinuousParam>(cfg.space->param(0)).log_scale);
    REQUIRE(cfg.space->category(2, 3) == "32");
}

TEST_CASE("invalid space declarations become config errors", "[run_config]") {
    // duplicated categorical choice
    const json dup = {{"objective", "mixed_test"},
                      {"space", json::array({{{"name", "batch"},
                                              {"kind", "categorical"},
                                              {"choices", json::array({32, 32})}}})}};
    REQUIRE_THROWS_AS(parse_run_config(dup), ConfigError);
    // degenerate bounds
    const json flat = {{"objective", "sphere"},
                       {"space", json::array({{{"name", "x"},
                                               {"kind", "continuous"},
                                               {"lo", 1.0},
                                               {"hi", 1.0}}})}};
    REQUIRE_THROWS_AS(parse_run_config(flat), ConfigError);
    // unknown kind
    const json kind = {{"objective", "sphere"},
                       {"space", json::array({{{"name", "x"}, {"kind", "weird"}}})}};
    REQUIRE_THROWS_AS(parse_run_config(kind), ConfigError);
}

TEST_CASE("smo overrides are validated", "[run_config]") {
    const json bad = {{"objective", "sphere"}, {"smo", {{"population_size", 2}}}};
    REQUIRE_THROWS_AS(parse_run_config(bad), ConfigError);
    const json good = {{"objective", "sphere"},
                       {"seed", 9},
                       {"smo", {{"population_size", 16}, {"max_evaluations", 500}}}};
    const RunConfig cfg = parse_run_config(good);
    REQUIRE(cfg.smo.population_size == 16);
    REQUIRE(cfg.smo.max_evaluations == 500);
    REQUIRE(cfg.smo.seed == 9);
}

TEST_CASE("objective resolution uses defaults and validates structure", "[run_config]") {
    RunConfig cfg;
    cfg.objective = "sphere";
    REQUIRE(build_objective(cfg).space.dim() == 2);

    cfg.objective = "mixed_test";
    const Objective mixed = build_objective(cfg);
    REQUIRE(mixed.space.dim() == 3);
    REQUIRE(mixed.known_optimum.has_value());

    cfg.objective = "nope";
    REQUIRE_THROWS_AS(build_objective(cfg), ConfigError);

    cfg.objective = "toy_seg";
    REQUIRE_THROWS_AS(build_objective(cfg), ConfigError);  // dataset_dir missing
}

TEST_CASE("mixed_test rejects structurally wrong spaces", "[run_config]") {
    json j = {{"objective", "mixed_test"},
              {"space", json::array({{{"name", "x"},
                                      {"kind", "continuous"},
                                      {"lo", 0.0},
                                      {"hi", 1.0}}})}};
    RunConfig cfg = parse_run_config(j);
    REQUIRE_THROWS_AS(build_objective(cfg), ConfigError);
}

TEST_CASE("enhance settings round trip through json", "[run_config]") {
    EnhanceSettings s;
    s.pmd.kappa = 0.25;
    s.pmd.iterations = 7;
    s.pmd.edge_fn = EdgeFunction::rational;
    s.clahe.clip_limit = 3.5;
    s.clahe.tiles_x = 4;
    const EnhanceSettings back = enhance_settings_from_json(enhance_settings_to_json(s));
    REQUIRE(back.pmd.kappa == s.pmd.kappa);
    REQUIRE(back.pmd.iterations == 7);
    REQUIRE(back.pmd.edge_fn == EdgeFunction::rational);
    REQUIRE(back.clahe.clip_limit == 3.5);
    REQUIRE(back.clahe.tiles_x == 4);
}

TEST_CASE("enhance settings validate parameter ranges", "[run_config]") {
    json j = {{"pmd", {{"lambda", 0.9}}}};
    REQUIRE_THROWS_AS(enhance_settings_from_json(j), ConfigError);
    j = {{"order", "sideways"}};
    REQUIRE_THROWS_AS(enhance_settings_from_json(j), ConfigError);
    j = {{"clahe", {{"bins", 1}}}};
    REQUIRE_THROWS_AS(enhance_settings_from_json(j), ConfigError);
}
