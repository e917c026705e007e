#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "portsim/berth.hpp"
#include "portsim/drm.hpp"
#include "portsim/network.hpp"

namespace portsim {

struct RunSettings {
    double horizon_min = 525600.0;  // one simulated year
    std::uint64_t seed = 1;
    int replications = 20;
    double obs_window_min = 1440.0;
    std::optional<std::int64_t> max_arrivals;  // source stops after this many
    double confidence = 0.95;
};

// A fully loaded model: process graph, arrival process, DRM, Berth and run
// settings. Immutable once validated; one scenario can feed any number of
// concurrent replications.
struct Scenario {
    std::string name;
    ProcessGraph graph;
    ArrivalSpec arrivals;
    Drm drm;
    std::optional<std::string> drm_scenario_label;
    LoadModifier load_modifier;
    BerthSpec berth;
    RunSettings run;
    std::string hash_hex;  // canonical-form content hash
    std::string source_path;

    bool has_berth_node() const {
        for (const Node& n : graph.nodes)
            if (n.kind == NodeKind::Berth) return true;
        return false;
    }
};

// Parses the scenario document. Throws ParseError on unreadable files,
// malformed JSON or structurally unusable fields. Semantic rules are
// reported by validate_scenario instead.
Scenario load_scenario(const std::string& path);
Scenario load_scenario_from_string(const std::string& text, const std::string& origin);

// Every violated invariant across graph, arrivals, DRM, berth and run
// settings; empty means the scenario is ready to simulate.
std::vector<ValidationIssue> validate_scenario(Scenario& scenario);

// All (containment, commodity, threat, sensor) combinations this scenario
// can query, for DRM gap reporting.
std::vector<DrmKey> drm_universe(const Scenario& scenario);

}  // namespace portsim
