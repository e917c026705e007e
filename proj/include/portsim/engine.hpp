#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "portsim/berth.hpp"
#include "portsim/events.hpp"
#include "portsim/scenario.hpp"

namespace portsim {

// Per-shed report folded out of a finished run.
struct ShedReport {
    std::int32_t node = -1;
    std::string name;
    std::string sensor;
    double mean_queue = 0.0;   // time-average entrance-queue length
    double mean_system = 0.0;  // time-average (queue + in service)
    double utilization = 0.0;  // busy-server fraction of capacity
    std::int64_t admitted = 0;
    std::int64_t completed = 0;
    std::int64_t balked = 0;
};

// One observation window of the output time series.
struct WindowSample {
    double t_end = 0.0;
    std::int64_t detected = 0;          // detections inside the window
    std::int64_t missed = 0;            // clandestine misses inside the window
    std::vector<double> shed_mean_queue;  // per shed, window time-average
};

// Counters of a single replication. The two conservation identities hold on
// every finished run and are asserted by finalize():
//   arrivals == exits + in_flight_at_end + balked
//   clandestine_arrivals == detected + missed + clandestine_in_flight
struct RunCounters {
    std::int64_t arrivals = 0;
    std::int64_t clandestine_arrivals = 0;
    std::int64_t detected = 0;  // clandestine lorries detected (first TP)
    std::int64_t missed = 0;    // clandestine lorries that exited undetected
    std::int64_t false_positives = 0;  // FP screening events
    std::int64_t balked = 0;
    std::int64_t exits = 0;
    std::int64_t in_flight_at_end = 0;
    std::int64_t clandestine_in_flight = 0;
    double end_time = 0.0;
    std::int64_t events_processed = 0;
    std::int64_t berth_ticks = 0;
    std::int64_t berth_checks = 0;

    std::map<std::pair<std::int32_t, std::string>, std::int64_t> detected_by;
    std::vector<ShedReport> sheds;
    std::vector<WindowSample> windows;
};

// detected / (detected + missed): the detection fraction among clandestine
// lorries whose passage completed. nullopt when no clandestine passage
// completed (undefined, distinct from 0).
std::optional<double> detection_fraction(const RunCounters& rc);

// Executes one replication of the scenario. Strictly single-threaded and
// deterministic: the result is a pure function of (scenario, master_seed,
// replication).
RunCounters simulate(const Scenario& scenario, std::uint64_t master_seed,
                     std::uint64_t replication);

// As simulate(), with the horizon overridden (used by sweeps and tests).
RunCounters simulate_horizon(const Scenario& scenario, std::uint64_t master_seed,
                             std::uint64_t replication, double horizon_min);

}  // namespace portsim
