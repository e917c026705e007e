#include <doctest.h>

#include <cmath>

#include "portsim/analysis.hpp"
#include "portsim/engine.hpp"
#include "portsim/scenario.hpp"

using namespace portsim;

namespace {

Scenario load_inline(const std::string& text) {
    Scenario sc = load_scenario_from_string(text, "inline");
    const auto issues = validate_scenario(sc);
    REQUIRE_MESSAGE(issues.empty(), (issues.empty() ? "" : issues.front().message));
    return sc;
}

// One shed between source and sink, parameters injected.
std::string single_shed_json(const std::string& run_extra, const std::string& shed_extra,
                             double rate_per_hour = 30.0,
                             const std::string& service =
                                 R"({ "family": "exponential", "mean": 1.0 })") {
    return R"({
      "name": "single-shed",
      "arrivals": { "base_rate_per_hour": )" +
           std::to_string(rate_per_hour) + R"(, "clandestine_probability": 0.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "service_shed", "name": "shed", "sensor": null,
          "service_time": )" +
           service + shed_extra + R"( },
        { "id": 2, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 2 } ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } },
      "run": { "obs_window_min": 100000, "seed": 1 )" +
           run_extra + R"( }
    })";
}

}  // namespace

TEST_CASE("t_end of zero processes nothing") {
    const Scenario sc = load_inline(single_shed_json("", ""));
    const RunCounters rc = simulate_horizon(sc, 1, 0, 0.0);
    CHECK(rc.events_processed == 0);
    CHECK(rc.arrivals == 0);
    CHECK(rc.exits == 0);
}

TEST_CASE("same seed gives identical counters, different seeds differ") {
    const Scenario sc = load_inline(single_shed_json("", ""));
    const RunCounters a = simulate_horizon(sc, 42, 0, 10000.0);
    const RunCounters b = simulate_horizon(sc, 42, 0, 10000.0);
    CHECK(a.arrivals == b.arrivals);
    CHECK(a.exits == b.exits);
    CHECK(a.events_processed == b.events_processed);
    CHECK(a.sheds[0].mean_queue == b.sheds[0].mean_queue);

    const RunCounters c = simulate_horizon(sc, 43, 0, 10000.0);
    CHECK(a.arrivals != c.arrivals);
}

TEST_CASE("conservation holds at the end of every run") {
    const std::string json = single_shed_json("", "");
    Scenario sc = load_scenario_from_string(json, "inline");
    REQUIRE(validate_scenario(sc).empty());
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
        const RunCounters rc = simulate_horizon(sc, 7, rep, 5000.0);
        CHECK(rc.arrivals == rc.exits + rc.in_flight_at_end + rc.balked);
        CHECK(rc.clandestine_arrivals ==
              rc.detected + rc.missed + rc.clandestine_in_flight);
    }
}

TEST_CASE("annual arrivals at the calibrated rate match the Poisson mean") {
    // lambda*T = 102.74/h * 8760 h = 900002.4; allow 4 standard deviations.
    const Scenario sc = load_inline(single_shed_json(
        "", R"(, "servers": 8, "exit_buffers": 10)", 102.74,
        R"({ "family": "constant", "value": 0.05 })"));
    const RunCounters rc = simulate_horizon(sc, 2024, 0, 525600.0);
    const double expected = 102.74 * 8760.0;
    CHECK(std::fabs(rc.arrivals - expected) < 4.0 * std::sqrt(expected));
}

TEST_CASE("M/M/1 mean number in system approaches rho/(1-rho)") {
    // lambda = 0.5/min, mu = 1/min -> L = 1. Shorter sanity version of the
    // acceptance criterion.
    const Scenario sc = load_inline(single_shed_json("", ""));
    const RunCounters rc = simulate_horizon(sc, 11, 0, 200000.0);
    CHECK(rc.sheds[0].mean_system == doctest::Approx(1.0).epsilon(0.10));
    CHECK(rc.sheds[0].utilization == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("hold semantics: a lorry is admitted only when an exit slot frees") {
    // Single server, single exit buffer, downstream shed with capacity 1 and
    // slow service: the exit buffer stays occupied, so at most one lorry can
    // be in service upstream and the rest wait in the entrance queue.
    const std::string json = R"({
      "name": "hold",
      "arrivals": { "base_rate_per_hour": 600.0, "clandestine_probability": 0.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "service_shed", "name": "fast", "sensor": null,
          "service_time": { "family": "constant", "value": 0.1 }, "exit_buffers": 1 },
        { "id": 2, "kind": "service_shed", "name": "slow", "sensor": null,
          "service_time": { "family": "constant", "value": 50.0 }, "queue_capacity": 1 },
        { "id": 3, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 2 }, { "from": 2, "to": 3 } ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } },
      "run": { "obs_window_min": 100000, "seed": 1 }
    })";
    Scenario sc = load_scenario_from_string(json, "inline");
    REQUIRE(validate_scenario(sc).empty());
    const RunCounters rc = simulate_horizon(sc, 5, 0, 200.0);
    // Not enough downstream capacity: in ~200 min the slow shed completes at
    // most 4 lorries; the fast shed can have completed only a handful (its
    // exit buffer blocks), never the ~2000 that arrived.
    CHECK(rc.arrivals > 1500);
    CHECK(rc.sheds[0].completed <= 8);
    CHECK(rc.arrivals == rc.exits + rc.in_flight_at_end + rc.balked);
}

TEST_CASE("bounded queue with drop policy balks and counts") {
    const Scenario sc = load_inline(single_shed_json(
        "", R"(, "queue_capacity": 2, "full_queue_policy": "drop")", 600.0,
        R"({ "family": "constant", "value": 10.0 })"));
    const RunCounters rc = simulate_horizon(sc, 6, 0, 1000.0);
    CHECK(rc.balked > 0);
    CHECK(rc.arrivals == rc.exits + rc.in_flight_at_end + rc.balked);
}

TEST_CASE("bounded queue with block policy never exceeds capacity") {
    // Blocked lorries wait outside the shed (source-held), the entrance queue
    // itself stays at or below capacity.
    const Scenario sc = load_inline(single_shed_json(
        "", R"(, "queue_capacity": 3, "full_queue_policy": "block")", 600.0,
        R"({ "family": "constant", "value": 10.0 })"));
    const RunCounters rc = simulate_horizon(sc, 6, 0, 1000.0);
    CHECK(rc.balked == 0);
    // Mean queue can never exceed the cap if the instantaneous length never did.
    CHECK(rc.sheds[0].mean_queue <= 3.0 + 1e-9);
    CHECK(rc.arrivals == rc.exits + rc.in_flight_at_end + rc.balked);
}

TEST_CASE("jumps consume zero simulated time") {
    const std::string json = R"({
      "name": "jump-net",
      "arrivals": { "base_rate_per_hour": 60.0, "clandestine_probability": 0.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "jump", "name": "hop", "label": "to-exit" },
        { "id": 2, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 } ],
      "jumps": { "to-exit": 2 },
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } },
      "run": { "obs_window_min": 100000, "seed": 1 }
    })";
    Scenario sc = load_scenario_from_string(json, "inline");
    REQUIRE(validate_scenario(sc).empty());
    const RunCounters rc = simulate_horizon(sc, 3, 0, 5000.0);
    CHECK(rc.arrivals > 0);
    // Source -> jump -> sink is all zero-time: every lorry exits instantly.
    CHECK(rc.exits == rc.arrivals);
    CHECK(rc.in_flight_at_end == 0);
}

TEST_CASE("screening at a shed detects, diverts and counts") {
    const std::string json = R"({
      "name": "screen-net",
      "arrivals": { "base_rate_per_hour": 60.0, "clandestine_probability": 1.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "service_shed", "name": "gate", "sensor": "S1", "servers": 4,
          "exit_buffers": 6, "service_time": { "family": "constant", "value": 0.5 },
          "on_positive": 2 },
        { "id": 2, "kind": "service_shed", "name": "deep", "sensor": "S2", "servers": 4,
          "exit_buffers": 6, "service_time": { "family": "constant", "value": 0.5 } },
        { "id": 3, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 3 }, { "from": 2, "to": 3 } ],
      "drm": { "default": { "tp": 0.6, "fp": 0.0 } },
      "run": { "obs_window_min": 100000, "seed": 1, "max_arrivals": 20000,
               "horizon_min": 100000 }
    })";
    Scenario sc = load_scenario_from_string(json, "inline");
    REQUIRE(validate_scenario(sc).empty());
    const RunCounters rc = simulate(sc, 9, 0);
    CHECK(rc.arrivals == 20000);
    CHECK(rc.in_flight_at_end == 0);
    // All lorries carry clandestines; the single gate detects ~60%.
    const auto f = detection_fraction(rc);
    REQUIRE(f.has_value());
    const double sd = std::sqrt(0.6 * 0.4 / 20000.0);
    CHECK(std::fabs(*f - 0.6) < 4 * sd);
    // Detected lorries were diverted through the deep shed; with their load
    // already removed they cannot be detected twice.
    CHECK(rc.detected_by.count({1, "S1"}) == 1);
    CHECK(rc.detected_by.count({2, "S2"}) == 0);
    CHECK(rc.detected + rc.missed == 20000);
}

TEST_CASE("replication batches reproduce solo runs exactly") {
    Scenario sc = load_inline(single_shed_json("", ""));
    const ReplicationSet batch = run_replications_horizon(sc, 5, 77, 2000.0, 2);
    const RunCounters solo = simulate_horizon(sc, 77, 3, 2000.0);
    CHECK(batch.replications[3].arrivals == solo.arrivals);
    CHECK(batch.replications[3].exits == solo.exits);
    CHECK(batch.replications[3].events_processed == solo.events_processed);

    const ReplicationSet serial = run_replications_horizon(sc, 5, 77, 2000.0, 1);
    for (int i = 0; i < 5; ++i) {
        CHECK(serial.replications[i].arrivals == batch.replications[i].arrivals);
        CHECK(serial.replications[i].sheds[0].mean_queue ==
              batch.replications[i].sheds[0].mean_queue);
    }
}

TEST_CASE("berth departures split detected from missed") {
    // Every lorry is clandestine and parks for a fixed dwell; squads check
    // twice a minute. With a certain sensor everything is detected before
    // departure; with a blind sensor everything departs and is missed.
    const std::string base = R"({
      "name": "berth-count",
      "arrivals": { "base_rate_per_hour": 60.0, "clandestine_probability": 1.0,
        "soft_fraction": 1.0, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "berth", "name": "berth" },
        { "id": 2, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 2 } ],
      "drm": { "default": { "tp": TP, "fp": 0.0 } },
      "berth": {
        "mode": "check_once",
        "dwell_time": { "family": "constant", "value": 10.0 },
        "squads": [ { "check_interval": { "family": "constant", "value": 0.5 } } ]
      },
      "run": { "obs_window_min": 100000, "seed": 1, "max_arrivals": 2000,
               "horizon_min": 100000 }
    })";
    const auto run_with_tp = [&](const std::string& tp) {
        std::string json = base;
        json.replace(json.find("TP"), 2, tp);
        Scenario sc = load_scenario_from_string(json, "inline");
        REQUIRE(validate_scenario(sc).empty());
        return simulate(sc, 33, 0);
    };

    const RunCounters certain = run_with_tp("1.0");
    CHECK(certain.detected == 2000);
    CHECK(certain.missed == 0);
    CHECK(certain.exits == 2000);  // detected lorries still exit, clean

    const RunCounters blind = run_with_tp("0.0");
    CHECK(blind.detected == 0);
    CHECK(blind.missed == 2000);
    CHECK(blind.exits == 2000);
    CHECK(blind.berth_checks <= blind.berth_ticks);
    // CheckOnce: nobody is screened twice, so checks never exceed lorries.
    CHECK(blind.berth_checks <= 2000);
}

TEST_CASE("throughput fractions converge to the analytic path probabilities") {
    // Unbounded queues, flat arrivals, a 0.2/0.3/0.5 fork: per-shed admission
    // counts over 1e5 lorries against a chi-square test at the 1% level.
    const std::string json = R"({
      "name": "fork3",
      "arrivals": { "base_rate_per_hour": 600.0, "clandestine_probability": 0.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "prob_router", "name": "fork" },
        { "id": 2, "kind": "service_shed", "name": "a", "servers": 4, "exit_buffers": 6,
          "service_time": { "family": "constant", "value": 0.2 } },
        { "id": 3, "kind": "service_shed", "name": "b", "servers": 4, "exit_buffers": 6,
          "service_time": { "family": "constant", "value": 0.2 } },
        { "id": 4, "kind": "service_shed", "name": "c", "servers": 4, "exit_buffers": 6,
          "service_time": { "family": "constant", "value": 0.2 } },
        { "id": 5, "kind": "sink", "name": "out" }
      ],
      "edges": [
        { "from": 0, "to": 1 },
        { "from": 1, "to": 2, "p": 0.2 },
        { "from": 1, "to": 3, "p": 0.3 },
        { "from": 1, "to": 4, "p": 0.5 },
        { "from": 2, "to": 5 }, { "from": 3, "to": 5 }, { "from": 4, "to": 5 }
      ],
      "drm": { "default": { "tp": 0.5, "fp": 0.0 } },
      "run": { "obs_window_min": 1000000, "seed": 1, "max_arrivals": 100000,
               "horizon_min": 1000000 }
    })";
    Scenario sc = load_scenario_from_string(json, "inline");
    REQUIRE(validate_scenario(sc).empty());
    const RunCounters rc = simulate(sc, 17, 0);
    REQUIRE(rc.arrivals == 100000);

    const double expected[3] = {0.2 * 100000, 0.3 * 100000, 0.5 * 100000};
    double chi2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double diff = rc.sheds[i].admitted - expected[i];
        chi2 += diff * diff / expected[i];
    }
    // chi-square 0.99 quantile at 2 degrees of freedom.
    CHECK(chi2 < 9.2103);
}

TEST_CASE("load modifier drags detection down under congestion") {
    const std::string base = R"({
      "name": "load-mod",
      "arrivals": { "base_rate_per_hour": 300.0, "clandestine_probability": 1.0,
        "soft_fraction": 0.5, "commodity_mix": { "general": 1.0 } },
      "nodes": [
        { "id": 0, "kind": "source", "name": "in" },
        { "id": 1, "kind": "service_shed", "name": "gate", "sensor": "S1",
          "service_time": { "family": "constant", "value": 0.19 } },
        { "id": 2, "kind": "sink", "name": "out" }
      ],
      "edges": [ { "from": 0, "to": 1 }, { "from": 1, "to": 2 } ],
      "drm": { "default": { "tp": 0.8, "fp": 0.0 },
               "load_modifier": { "alpha": ALPHA, "q0": 1, "floor": 0.1 } },
      "run": { "obs_window_min": 100000, "seed": 1, "max_arrivals": 20000,
               "horizon_min": 200000 }
    })";
    auto with_alpha = [&](const std::string& alpha) {
        std::string json = base;
        json.replace(json.find("ALPHA"), 5, alpha);
        Scenario sc = load_scenario_from_string(json, "inline");
        REQUIRE(validate_scenario(sc).empty());
        const RunCounters rc = simulate(sc, 5, 0);
        const auto f = detection_fraction(rc);
        REQUIRE(f.has_value());
        return *f;
    };
    const double inert = with_alpha("0.0");
    const double degraded = with_alpha("0.08");
    CHECK(inert == doctest::Approx(0.8).epsilon(0.02));
    CHECK(degraded < inert - 0.05);
}
