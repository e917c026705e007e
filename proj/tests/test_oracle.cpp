#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "portsim/oracle.hpp"
#include "portsim/rng.hpp"

using namespace portsim;

namespace {

std::string scenario_dir() {
    const char* env = std::getenv("PORTSIM_SCENARIOS");
    return env ? env : "scenarios";
}

AnalyticNet single_stage(double tp) {
    AnalyticNet net;
    const int sink = net.add_terminal();
    net.root = net.add_stage("a", tp, sink);
    return net;
}

AnalyticNet serial_stages(double tp1, double tp2) {
    AnalyticNet net;
    const int sink = net.add_terminal();
    const int b = net.add_stage("b", tp2, sink);
    net.root = net.add_stage("a", tp1, b);
    return net;
}

// 0.5 -> A(0.3) -> sink ; 0.5 -> B(0.3) -> C(0.4) -> sink
AnalyticNet split_net() {
    AnalyticNet net;
    const int sink = net.add_terminal();
    const int a = net.add_stage("a", 0.3, sink);
    const int c = net.add_stage("c", 0.4, sink);
    const int b = net.add_stage("b", 0.3, c);
    net.root = net.add_split({{0.5, a}, {0.5, b}});
    return net;
}

}  // namespace

TEST_CASE("single stage detects with exactly its rate") {
    CHECK(analytic_detection(single_stage(0.37)) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("two mandatory stages compose by complement product") {
    CHECK(analytic_detection(serial_stages(0.5, 0.5)) ==
          doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("the split example evaluates to 0.44") {
    CHECK(analytic_detection(split_net()) == doctest::Approx(0.44).epsilon(1e-12));
}

TEST_CASE("boundary values: D(0) = 0 and D(1) = 1") {
    for (const auto& net : {single_stage(0.5), serial_stages(0.3, 0.7), split_net()}) {
        CHECK(analytic_detection(net.with_tp(0.0)) == doctest::Approx(0.0));
        CHECK(analytic_detection(net.with_tp(1.0)) == doctest::Approx(1.0));
    }
}

TEST_CASE("both oracle routes agree on randomized small nets") {
    RandomStream rng = make_stream(40, 0, "oracle-prop");
    for (int trial = 0; trial < 300; ++trial) {
        // Random layered net: a chain of stages with occasional splits and
        // positive diversions to a later stage.
        AnalyticNet net;
        const int sink = net.add_terminal();
        std::vector<int> later{sink};
        int current = sink;
        const int depth = 1 + static_cast<int>(rng.uniform_int(6));
        for (int d = 0; d < depth; ++d) {
            if (rng.bernoulli(0.3) && later.size() > 1) {
                const double p = 0.1 + 0.8 * rng.uniform();
                const int other =
                    later[static_cast<std::size_t>(rng.uniform_int(later.size()))];
                current = net.add_split({{p, current}, {1.0 - p, other}});
            } else {
                const int divert = rng.bernoulli(0.5)
                                       ? later[static_cast<std::size_t>(
                                             rng.uniform_int(later.size()))]
                                       : -1;
                current = net.add_stage("s", rng.uniform(), current, divert);
            }
            later.push_back(current);
        }
        net.root = current;
        const double by_paths = analytic_detection(net);
        const double by_outcomes = analytic_detection_outcome_tree(net);
        CHECK(by_paths == doctest::Approx(by_outcomes).epsilon(1e-12));
        CHECK(by_paths >= -1e-12);
        CHECK(by_paths <= 1.0 + 1e-12);
    }
}

TEST_CASE("raising any single stage tp never lowers detection") {
    AnalyticNet net = split_net();
    const double base = analytic_detection(net);
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        if (net.nodes[i].kind != AnalyticNode::Kind::Stage) continue;
        AnalyticNet bumped = net;
        bumped.nodes[i].tp = std::min(1.0, bumped.nodes[i].tp + 0.2);
        CHECK(analytic_detection(bumped) >= base - 1e-12);
    }
}

TEST_CASE("cycles are rejected") {
    AnalyticNet net;
    const int a = net.add_stage("a", 0.5, 1);
    net.add_stage("b", 0.5, a);
    net.root = a;
    CHECK_THROWS_AS(analytic_detection(net), OracleError);
}

TEST_CASE("path explosion hits the cap") {
    // A ladder of splits whose paths double per layer: 2^25 paths > 10^6.
    AnalyticNet net;
    int sink = net.add_terminal();
    int current = sink;
    for (int i = 0; i < 25; ++i) {
        const int split = net.add_split({{0.5, current}, {0.5, current}});
        current = split;
    }
    net.root = current;
    CHECK_THROWS_AS(analytic_detection(net), OracleError);
}

TEST_CASE("concavity verdict on the closed forms") {
    SUBCASE("two mandatory stages: D = 1-(1-p)^2 over {0, .5, 1}") {
        const CurveVerdict v = concavity_check(serial_stages(0.9, 0.9), {0.0, 0.5, 1.0});
        CHECK(v.values[0] == doctest::Approx(0.0));
        CHECK(v.values[1] == doctest::Approx(0.75));
        CHECK(v.values[2] == doctest::Approx(1.0));
        CHECK(v.monotone);
        CHECK(v.concave);  // differences 0.75, 0.25 decrease
        CHECK(v.min_stages == 2);
        CHECK(v.above_diagonal_applicable);
        CHECK(v.above_diagonal);
    }
    SUBCASE("single stage: D(p) = p is boundary concave, not above the diagonal rule") {
        const CurveVerdict v = concavity_check(single_stage(0.4), {0.0, 0.5, 1.0});
        CHECK(v.monotone);
        CHECK(v.concave);
        CHECK(v.min_stages == 1);
        CHECK(!v.above_diagonal_applicable);
    }
}

TEST_CASE("the shipped default scenario reduces and passes the shape checks") {
    Scenario sc = load_scenario(scenario_dir() + "/calais-default.json");
    REQUIRE(validate_scenario(sc).empty());
    const auto classes = reduce_scenario(sc);
    CHECK(classes.size() == 8);  // 2 sides x 4 commodities
    double weight = 0.0;
    for (const auto& c : classes) weight += c.weight;
    CHECK(weight == doctest::Approx(1.0));

    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    const CurveVerdict v = mixed_concavity(classes, grid);
    CHECK(v.monotone);
    CHECK(v.concave);
    CHECK(v.min_stages == 2);
    CHECK(v.above_diagonal_applicable);
    CHECK(v.above_diagonal);
    CHECK(v.values.front() == doctest::Approx(0.0));
    CHECK(v.values.back() == doctest::Approx(1.0));
}

TEST_CASE("the shipped validation nets match their closed forms") {
    Scenario single = load_scenario(scenario_dir() + "/validation/net-single.json");
    REQUIRE(validate_scenario(single).empty());
    CHECK(mixed_detection(reduce_scenario(single), 0.3) == doctest::Approx(0.3));

    Scenario serial = load_scenario(scenario_dir() + "/validation/net-serial.json");
    REQUIRE(validate_scenario(serial).empty());
    CHECK(mixed_detection(reduce_scenario(serial), 0.3) ==
          doctest::Approx(1.0 - 0.7 * 0.7));

    Scenario split = load_scenario(scenario_dir() + "/validation/net-split.json");
    REQUIRE(validate_scenario(split).empty());
    // Base rates: 0.5*0.3 + 0.5*(1 - 0.7*0.6) = 0.44 exactly.
    CHECK(mixed_detection(reduce_scenario(split)) == doctest::Approx(0.44).epsilon(1e-12));
}

TEST_CASE("a cycle closed through the Berth is caught by the reduction") {
    // Validation exempts Berth outbound edges from the acyclicity rule (the
    // recheck loop lives inside the Berth), so a flow that routes departing
    // lorries back upstream validates -- but it has no acyclic reduction.
    const std::string json = R"({
      "name": "berth-cycle",
      "arrivals": { "base_rate_per_hour": 10.0, "clandestine_probability": 1.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "service_shed", "name": "gate", "sensor": "S1",
          "service_time": { "family": "constant", "value": 1.0 } },
        { "id": 2, "kind": "berth", "name": "berth" },
        { "id": 3, "kind": "prob_router", "name": "rework" },
        { "id": 4, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 2 }, { "from": 2, "to": 3 },
                 { "from": 3, "to": 1, "p": 0.5 }, { "from": 3, "to": 4, "p": 0.5 } ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } },
      "berth": {
        "mode": "check_once",
        "dwell_time": { "family": "constant", "value": 5.0 },
        "squads": [ { "check_interval": { "family": "constant", "value": 1.0 } } ]
      }
    })";
    Scenario sc = load_scenario_from_string(json, "inline");
    CHECK(validate_scenario(sc).empty());
    CHECK_THROWS_AS(reduce_scenario(sc), OracleError);
}

TEST_CASE("mixed-sensor shortest-queue banks cannot be reduced") {
    const std::string json = R"({
      "name": "mixed-sq",
      "arrivals": { "base_rate_per_hour": 10.0, "clandestine_probability": 1.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "shortest_queue_router", "name": "bank" },
        { "id": 2, "kind": "service_shed", "name": "a", "sensor": "S1",
          "service_time": { "family": "constant", "value": 1.0 } },
        { "id": 3, "kind": "service_shed", "name": "b", "sensor": "S2",
          "service_time": { "family": "constant", "value": 1.0 } },
        { "id": 4, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 2 }, { "from": 1, "to": 3 },
                 { "from": 2, "to": 4 }, { "from": 3, "to": 4 } ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } }
    })";
    Scenario sc = load_scenario_from_string(json, "inline");
    REQUIRE(validate_scenario(sc).empty());
    CHECK_THROWS_AS(reduce_scenario(sc), OracleError);
}
