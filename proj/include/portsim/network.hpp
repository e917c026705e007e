#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "portsim/distributions.hpp"
#include "portsim/lorry.hpp"
#include "portsim/rng.hpp"

namespace portsim {

enum class NodeKind : std::uint8_t {
    Source,
    ServiceShed,
    ProbRouter,
    ShortestQueueRouter,
    Jump,
    Berth,
    Sink,
};

const char* to_string(NodeKind k);

enum class SideFilter : std::uint8_t { Soft, Hard, Both };

inline bool matches(SideFilter f, Side s) {
    return f == SideFilter::Both || (f == SideFilter::Soft) == (s == Side::Soft);
}

const char* to_string(SideFilter f);

enum class FullQueuePolicy : std::uint8_t { Block, Drop };

// A fixed screening station: entrance queue, server pool, hold-gated
// admission and single-slot exit buffers. A lorry is admitted from the
// entrance queue only when a server and an exit-buffer slot are both free;
// the exit buffer drains only when the downstream node accepts.
struct ServiceShedSpec {
    std::string sensor;  // empty: plain service point, no screening resolution
    std::optional<int> queue_capacity;  // nullopt: unbounded
    int servers = 1;
    DistributionSpec service_time;
    int exit_buffers = 2;
    SideFilter applies_to = SideFilter::Both;
    FullQueuePolicy full_queue_policy = FullQueuePolicy::Block;
    std::int32_t on_positive = -1;  // destination for flagged lorries; -1: none
};

struct Node {
    std::int32_t id = -1;
    std::string name;
    NodeKind kind = NodeKind::Sink;
    ServiceShedSpec shed;    // ServiceShed only
    std::string jump_label;  // Jump only
};

struct Edge {
    std::int32_t from = -1;
    std::int32_t to = -1;
    double probability = 1.0;
    SideFilter side = SideFilter::Both;
};

// Validated node/edge network. Jumps consume zero simulated time; the only
// repetition in the flow is the Berth's recheck mode, so the edge graph
// (excluding Berth outbound edges) must be acyclic.
struct ProcessGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::map<std::string, std::int32_t> jumps;  // label -> target node id

    // Derived by build_index(); edge indices in declaration order.
    std::vector<std::vector<std::int32_t>> out_edges;
    std::map<std::int32_t, std::int32_t> index_of_id;

    void build_index();

    const Node* find(std::int32_t id) const {
        const auto it = index_of_id.find(id);
        return it == index_of_id.end() ? nullptr : &nodes[it->second];
    }
    std::int32_t index(std::int32_t id) const {
        const auto it = index_of_id.find(id);
        return it == index_of_id.end() ? -1 : it->second;
    }
};

// Arrival process: piecewise-constant weekly rate profile (168 hourly
// multipliers) over a base rate, plus the entity attribute mix.
struct ArrivalSpec {
    double base_rate_per_hour = 0.0;
    std::vector<double> weekly_profile;  // empty or 168 entries, all >= 0
    double clandestine_probability = 0.0;
    double soft_fraction = 0.5;
    std::vector<std::string> commodity_labels = {"general"};
    std::vector<double> commodity_weights = {1.0};

    // Cached by finalize(): peak multiplier and flatness.
    double peak_multiplier = 1.0;
    bool flat = true;

    void finalize();

    double multiplier_at(double now_min) const {
        if (weekly_profile.empty()) return 1.0;
        const auto hour = static_cast<std::size_t>(now_min / 60.0);
        return weekly_profile[hour % weekly_profile.size()];
    }
};

struct ValidationIssue {
    std::int32_t node = -1;  // -1: not tied to a node
    std::string rule;        // stable identifier of the violated rule
    std::string message;
};

// Every structural invariant of the graph, reported exhaustively (one issue
// per violation, each naming the offending node and rule).
std::vector<ValidationIssue> validate_graph(ProcessGraph& graph);

std::vector<ValidationIssue> validate_arrivals(const ArrivalSpec& spec);

// Next arrival gap (minutes) from a piecewise-constant-rate Poisson process,
// generated by thinning against the peak rate. Exact stationary exponential
// when the profile is flat. Returns nullopt when the rate is zero everywhere.
std::optional<double> sample_interarrival(const ArrivalSpec& spec, double now,
                                          RandomStream& rng);

// Categorical branch over the router's outgoing edges restricted to those
// whose side filter matches the lorry. Throws ModelError when nothing
// matches (validation rules this out for validated graphs).
std::int32_t route_probabilistic(const ProcessGraph& graph, const Node& router,
                                 const Lorry& lorry, RandomStream& rng);

// Shed with minimal (entrance queue + in service); ties break to the lowest
// node id. Candidates are (node id, load) pairs.
std::int32_t route_shortest_queue(
    const std::vector<std::pair<std::int32_t, int>>& candidates);

}  // namespace portsim
