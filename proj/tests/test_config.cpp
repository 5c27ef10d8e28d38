#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "cellflow/config.hpp"

using namespace cellflow;
using Catch::Matchers::WithinRel;

TEST_CASE("defaults reflect the reference experiment setup", "[config]") {
    const RunConfig cfg = parse_config(nlohmann::json::object());
    CHECK(cfg.fluid.eta0 == 1.0);
    CHECK(cfg.fluid.eta_inf == 1e-3);
    CHECK(cfg.cell.n_seg == 64);
    CHECK(cfg.cell.h == 0.08);
    CHECK(cfg.cell.n_layers == 8);
    CHECK(cfg.solver.max_iter == 100);
    CHECK(cfg.solver.tol_rel == 1e-8);
    CHECK(cfg.solver.relax == 1.0);
    CHECK(cfg.sweep.f1_count == 20);
    CHECK(cfg.sweep.f1_start == 0.05);
    CHECK(cfg.sweep.theta_count == 16);
    CHECK(cfg.deterministic_seedless);
    REQUIRE(cfg.cell.shape.has_value());
    CHECK(cfg.cell.shape->kind == InclusionKind::Disk);
}

TEST_CASE("full configuration parses", "[config]") {
    const auto j = nlohmann::json::parse(R"({
        "cell": {
            "shape": {"kind": "ellipse", "semi_major": 0.3, "semi_minor": 0.1, "angle": 0.5},
            "n_seg": 32, "h": 0.1, "n_layers": 6, "clearance": 0.04
        },
        "fluid": {"eta0": 2.0, "eta_inf": 0.01, "lambda": 10.0, "r": 2.3},
        "gamma": 2.0,
        "solver": {"max_iter": 50, "tol_rel": 1e-7, "relax": 0.7, "tol_linear": 1e-9,
                   "delta_reg": 1e-5},
        "sweep": {"f1_start": 0.1, "f1_stop": 0.9, "f1_count": 9, "theta_count": 5,
                  "family": "power"},
        "output": {"dir": "results"},
        "deterministic_seedless": true
    })");
    const RunConfig cfg = parse_config(j);
    CHECK(cfg.cell.shape->kind == InclusionKind::Ellipse);
    CHECK(cfg.cell.shape->semi_major == 0.3);
    CHECK(cfg.cell.shape->angle == 0.5);
    CHECK(cfg.cell.clearance == 0.04);
    CHECK(cfg.fluid.r == 2.3);
    CHECK(cfg.gamma == 2.0);
    CHECK(cfg.solver.relax == 0.7);
    CHECK(cfg.sweep.family == "power");
    CHECK(cfg.out_dir == "results");
}

TEST_CASE("unknown keys are rejected at every level", "[config]") {
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"celll": {}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"cell": {"hh": 0.1}})")), ConfigError);
    CHECK_THROWS_AS(
        parse_config(nlohmann::json::parse(R"({"cell": {"shape": {"kind": "disk", "size": 1}}})")),
        ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"fluid": {"eta": 1}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"solver": {"tol": 1}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"sweep": {"count": 3}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"output": {"path": "x"}})")),
                    ConfigError);
}

TEST_CASE("invalid values are rejected", "[config]") {
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"cell": {"h": "thin"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"cell": {"n_seg": 8}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"fluid": {"r": 1.0}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"fluid": {"eta_inf": 2.0}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"solver": {"relax": 1.5}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"sweep": {"f1_count": 1}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"sweep": {"family": "newton"}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"deterministic_seedless": false})")),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config(nlohmann::json::parse(R"({"cell": {"shape": {"kind": "disk", "radius": 0.5}}})")),
        ClearanceViolation);
}

TEST_CASE("config files load and bad paths fail cleanly", "[config]") {
    {
        std::ofstream out("test_config_ok.json");
        out << R"({"fluid": {"lambda": 100.0}})";
    }
    const RunConfig cfg = load_config("test_config_ok.json");
    CHECK(cfg.fluid.lambda == 100.0);
    std::remove("test_config_ok.json");

    CHECK_THROWS_AS(load_config("does_not_exist.json"), ConfigError);
    {
        std::ofstream out("test_config_bad.json");
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config("test_config_bad.json"), ConfigError);
    std::remove("test_config_bad.json");
}

TEST_CASE("shipped schema mirrors the strict parser", "[config]") {
    std::ifstream in(std::string(CELLFLOW_SOURCE_DIR) + "/schema/config.schema.json");
    REQUIRE(in.good());
    nlohmann::json schema;
    in >> schema;
    CHECK(schema.at("additionalProperties") == false);
    CHECK(schema.at("properties").contains("cell"));
    CHECK(schema.at("properties").contains("fluid"));
    CHECK(schema.at("properties").contains("sweep"));
    CHECK(schema["properties"]["deterministic_seedless"].at("const") == true);
}
