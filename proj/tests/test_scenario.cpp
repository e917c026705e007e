#include <doctest.h>

#include <cstdlib>
#include <string>

#include "portsim/errors.hpp"
#include "portsim/scenario.hpp"

using namespace portsim;

namespace {

std::string scenario_dir() {
    const char* env = std::getenv("PORTSIM_SCENARIOS");
    return env ? env : "scenarios";
}

}  // namespace

TEST_CASE("the shipped default scenario loads and validates with zero issues") {
    Scenario sc = load_scenario(scenario_dir() + "/calais-default.json");
    CHECK(sc.name == "calais-default");
    const auto issues = validate_scenario(sc);
    for (const auto& i : issues) MESSAGE(i.rule, ": ", i.message);
    CHECK(issues.empty());
    CHECK(sc.arrivals.clandestine_probability == 0.003);
    CHECK(sc.arrivals.base_rate_per_hour == doctest::Approx(102.74));
    CHECK(sc.has_berth_node());
    CHECK(sc.berth.mode == BerthMode::CheckOnce);
    CHECK(sc.drm.entry_count() == 8);
    CHECK(sc.hash_hex.size() == 16);
}

TEST_CASE("the shipped validation nets load and validate") {
    for (const char* name : {"net-single", "net-serial", "net-split"}) {
        Scenario sc = load_scenario(scenario_dir() + "/validation/" + name + ".json");
        CHECK(validate_scenario(sc).empty());
        CHECK(sc.arrivals.clandestine_probability == 1.0);
        CHECK(sc.run.max_arrivals == 10000);
    }
}

TEST_CASE("missing files and malformed JSON raise ParseError") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/nowhere.json"), ParseError);
    CHECK_THROWS_AS(load_scenario_from_string("{ not json", "inline"), ParseError);
    CHECK_THROWS_AS(load_scenario_from_string("{}", "inline"), ParseError);
}

TEST_CASE("semantic violations come back as a full issue list, not exceptions") {
    const std::string json = R"({
      "name": "broken",
      "arrivals": { "base_rate_per_hour": 10.0, "clandestine_probability": 2.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "prob_router", "name": "r" },
        { "id": 2, "kind": "service_shed", "name": "a",
          "service_time": { "family": "constant", "value": 1.0 } },
        { "id": 3, "kind": "service_shed", "name": "b",
          "service_time": { "family": "constant", "value": 1.0 } },
        { "id": 4, "kind": "sink", "name": "out" }
      ],
      "edges": [
        { "from": 0, "to": 1 },
        { "from": 1, "to": 2, "p": 0.5 },
        { "from": 1, "to": 3, "p": 0.6 },
        { "from": 2, "to": 4 }, { "from": 3, "to": 4 }
      ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } }
    })";
    Scenario sc = load_scenario_from_string(json, "inline");
    const auto issues = validate_scenario(sc);
    // Both the router sum and the arrival probability are reported.
    bool router = false, prevalence = false;
    for (const auto& i : issues) {
        if (i.rule == "router-prob-sum" && i.node == 1) router = true;
        if (i.rule == "arrivals-clandestine-prob") prevalence = true;
    }
    CHECK(router);
    CHECK(prevalence);
}

TEST_CASE("drm entries missing level fields fail at parse time") {
    const std::string json = R"({
      "name": "bad-drm",
      "arrivals": { "base_rate_per_hour": 10.0, "clandestine_probability": 0.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 } ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 },
               "entries": [ { "level": 3, "commodity": "wood", "threat": "clandestine",
                              "sensor": "CO2", "tp": 0.5, "fp": 0.6 } ] }
    })";
    CHECK_THROWS_AS(load_scenario_from_string(json, "inline"), ParseError);
}

TEST_CASE("a berth node without a berth section is rejected") {
    const std::string json = R"({
      "name": "berthless",
      "arrivals": { "base_rate_per_hour": 10.0, "clandestine_probability": 0.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "berth", "name": "berth" },
        { "id": 2, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 2 } ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } }
    })";
    CHECK_THROWS_AS(load_scenario_from_string(json, "inline"), ParseError);
}

TEST_CASE("content hash is stable across formatting, sensitive to content") {
    const std::string a = R"({"name":"x","arrivals":{"base_rate_per_hour":10.0,
      "clandestine_probability":0.0,"soft_fraction":0.5,
      "commodity_mix":{"general":1.0}},
      "nodes":[{"id":0,"kind":"source","name":"in"},{"id":1,"kind":"sink","name":"out"}],
      "edges":[{"from":0,"to":1}],
      "drm":{"default":{"tp":0.5,"fp":0.0}}})";
    // Same document, different whitespace and key order.
    const std::string b = R"({
      "drm":{"default":{"fp":0.0,"tp":0.5}},
      "edges":[{"from":0,"to":1}],
      "nodes":[{"id":0,"kind":"source","name":"in"},{"id":1,"kind":"sink","name":"out"}],
      "arrivals":{"commodity_mix":{"general":1.0},"soft_fraction":0.5,
        "clandestine_probability":0.0,"base_rate_per_hour":10.0},
      "name":"x"
    })";
    const Scenario sa = load_scenario_from_string(a, "a");
    const Scenario sb = load_scenario_from_string(b, "b");
    CHECK(sa.hash_hex == sb.hash_hex);

    std::string c = a;
    c.replace(c.find("10.0"), 4, "11.0");
    CHECK(load_scenario_from_string(c, "c").hash_hex != sa.hash_hex);
}

TEST_CASE("drm universe spans sensors x sides x commodities") {
    Scenario sc = load_scenario(scenario_dir() + "/calais-default.json");
    REQUIRE(validate_scenario(sc).empty());
    const auto universe = drm_universe(sc);
    // 6 sensors (PMMW, CO2, HBD, Visual, Search, CO2-mobile) x 2 sides x 4
    // commodities.
    CHECK(universe.size() == 48);
    const auto gaps = sc.drm.gaps(universe);
    CHECK(gaps.size() < universe.size());
    for (const auto& key : gaps) {
        CHECK(sc.drm.lookup(key).level == DrmLevel::Default);
    }
}
