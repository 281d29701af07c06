#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "paw/config_io.hpp"
#include "paw/model.hpp"

using namespace paw;

namespace {

json ab_json() {
    return json::parse(R"({
        "mode": "discrete",
        "seed": 1,
        "n_steps": 1000,
        "x_law": {"family": "discrete_pmf", "pmf": [[1, 1.0]]},
        "nu_law": {"pmf": [[1, 1.0]], "truncation": "min"},
        "bonus": {"scheme": "full_bonus", "y_law": {"family": "discrete_pmf", "pmf": [[1, 1.0]]}}
    })");
}

}  // namespace

TEST_CASE("parse the minimal discrete config") {
    const auto cfg = parse_config(ab_json());
    REQUIRE(cfg.model.mode == Mode::Discrete);
    REQUIRE(cfg.model.seed == 1);
    REQUIRE(cfg.model.n_steps == 1000);
    REQUIRE(cfg.model.x_law.family == WeightLaw::Family::DiscretePmf);
    REQUIRE(cfg.model.nu_law.truncation == Truncation::Min);
    REQUIRE(cfg.model.bonus.scheme == Scheme::FullBonus);
    REQUIRE(validate(cfg.model).empty());
    REQUIRE(cfg.replicas == 1);
    REQUIRE(cfg.solve.J == 100000);
}

TEST_CASE("parse every law family") {
    auto j = ab_json();
    j["mode"] = "continuous";
    j["x_law"] = {{"family", "exponential"}, {"rate", 2.0}};
    j["bonus"] = {{"scheme", "equal_split"},
                  {"z_law", {{"family", "gamma"}, {"shape", 2.0}, {"scale", 1.5}}}};
    auto cfg = parse_config(j);
    REQUIRE(cfg.model.x_law.rate == 2.0);
    REQUIRE(cfg.model.bonus.law.shape == 2.0);

    j["x_law"] = {{"family", "uniform"}, {"lo", 0.5}, {"hi", 1.5}};
    cfg = parse_config(j);
    REQUIRE(cfg.model.x_law.hi == 1.5);

    j["mode"] = "discrete";
    j["x_law"] = {{"family", "constant"}, {"value", 2.0}};
    j["bonus"] = {{"scheme", "exchangeable_iid"},
                  {"y_law", {{"family", "constant"}, {"value", 1.0}}}};
    cfg = parse_config(j);
    REQUIRE(cfg.model.x_law.value == 2.0);
    REQUIRE(cfg.model.bonus.scheme == Scheme::ExchangeableIid);
    REQUIRE(validate(cfg.model).empty());
}

TEST_CASE("unknown keys are hard errors") {
    auto top = ab_json();
    top["n_step"] = 5;  // typo
    REQUIRE_THROWS_AS(parse_config(top), ConfigError);

    auto law = ab_json();
    law["x_law"]["rate"] = 1.0;  // rate on a pmf law
    REQUIRE_THROWS_AS(parse_config(law), ConfigError);

    auto run = ab_json();
    run["run"] = {{"snapshot_jmax", 10}};
    REQUIRE_THROWS_AS(parse_config(run), ConfigError);

    auto nu = ab_json();
    nu["nu_law"]["trunc"] = "min";
    REQUIRE_THROWS_AS(parse_config(nu), ConfigError);
}

TEST_CASE("missing required keys are reported") {
    for (const char* key : {"mode", "seed", "n_steps", "x_law", "nu_law", "bonus"}) {
        auto j = ab_json();
        j.erase(key);
        REQUIRE_THROWS_AS(parse_config(j), ConfigError);
    }
}

TEST_CASE("bad enum values are rejected") {
    auto j = ab_json();
    j["mode"] = "semidiscrete";
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);

    j = ab_json();
    j["bonus"]["scheme"] = "lottery";
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);

    j = ab_json();
    j["nu_law"]["truncation"] = "clip";
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);

    j = ab_json();
    j["x_law"]["family"] = "cauchy";
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("option sections are parsed") {
    auto j = ab_json();
    j["run"] = {{"snapshot_j_max", 20},
                {"t_grid", {0.5, 1.0}},
                {"max_steps", 12345},
                {"replicas", 4},
                {"checkpoints", {10, 100}}};
    j["solve"] = {{"J", 500}, {"h", 0.02}, {"t_max", 10.0}, {"c_window", {10, 100}}};
    j["analysis"] = {{"tail_fraction", 0.05},
                     {"compare_j_max", 5},
                     {"compare_t", {1.0, 2.0}},
                     {"sup_tolerance", 0.01},
                     {"doubling_window", {100, 200}},
                     {"slope_window", {10.0, 20.0}}};
    const auto cfg = parse_config(j);
    REQUIRE(cfg.run.snapshot_j_max == 20);
    REQUIRE(cfg.run.t_grid == std::vector<double>{0.5, 1.0});
    REQUIRE(cfg.run.max_steps == 12345);
    REQUIRE(cfg.replicas == 4);
    REQUIRE(cfg.run.checkpoints == std::vector<std::uint64_t>{10, 100});
    REQUIRE(cfg.solve.J == 500);
    REQUIRE(cfg.solve.h == 0.02);
    REQUIRE(cfg.solve.c_window_lo == 10);
    REQUIRE(cfg.analysis.tail_fraction == 0.05);
    REQUIRE(cfg.analysis.sup_tolerance.has_value());
    REQUIRE(*cfg.analysis.sup_tolerance == 0.01);
    REQUIRE(cfg.analysis.doubling_hi == 200);
    REQUIRE(cfg.analysis.slope_hi == 20.0);
}

TEST_CASE("round trip through to_json") {
    auto j = ab_json();
    j["run"] = {{"replicas", 3}};
    j["analysis"] = {{"sup_tolerance", 0.02}};
    const auto cfg = parse_config(j);
    const auto cfg2 = parse_config(to_json(cfg));
    REQUIRE(to_json(cfg) == to_json(cfg2));
    REQUIRE(cfg2.replicas == 3);
    REQUIRE(cfg2.model.bonus.scheme == Scheme::FullBonus);
}

TEST_CASE("config hash is stable and sensitive") {
    const auto a = parse_config(ab_json());
    auto j = ab_json();
    j["seed"] = 2;
    const auto b = parse_config(j);
    REQUIRE(config_hash(a) == config_hash(a));
    REQUIRE(config_hash(a) != config_hash(b));
    REQUIRE(config_hash(a).size() == 16);
}

TEST_CASE("equal split is serialized with its z_law") {
    auto j = ab_json();
    j["bonus"] = {{"scheme", "equal_split"},
                  {"z_law", {{"family", "discrete_pmf"}, {"pmf", {{2, 1.0}}}}}};
    j["nu_law"]["pmf"] = {{2, 1.0}};
    const auto cfg = parse_config(j);
    const auto round = to_json(cfg);
    REQUIRE(round["bonus"].contains("z_law"));
    REQUIRE_FALSE(round["bonus"].contains("y_law"));
}
