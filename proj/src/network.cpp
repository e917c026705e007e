#include "portsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "portsim/errors.hpp"

namespace portsim {

namespace {
constexpr double kProbTol = 1e-9;
}

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Source: return "source";
        case NodeKind::ServiceShed: return "service_shed";
        case NodeKind::ProbRouter: return "prob_router";
        case NodeKind::ShortestQueueRouter: return "shortest_queue_router";
        case NodeKind::Jump: return "jump";
        case NodeKind::Berth: return "berth";
        case NodeKind::Sink: return "sink";
    }
    return "?";
}

const char* to_string(SideFilter f) {
    switch (f) {
        case SideFilter::Soft: return "soft";
        case SideFilter::Hard: return "hard";
        case SideFilter::Both: return "both";
    }
    return "?";
}

void ProcessGraph::build_index() {
    index_of_id.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        index_of_id.emplace(nodes[i].id, static_cast<std::int32_t>(i));
    }
    out_edges.assign(nodes.size(), {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto it = index_of_id.find(edges[e].from);
        if (it != index_of_id.end()) {
            out_edges[it->second].push_back(static_cast<std::int32_t>(e));
        }
    }
}

void ArrivalSpec::finalize() {
    peak_multiplier = 1.0;
    flat = true;
    if (!weekly_profile.empty()) {
        peak_multiplier = *std::max_element(weekly_profile.begin(), weekly_profile.end());
        for (const double m : weekly_profile) {
            if (m != weekly_profile.front()) {
                flat = false;
                break;
            }
        }
        if (flat) peak_multiplier = weekly_profile.front();
    }
}

namespace {

struct GraphView {
    const ProcessGraph& g;

    // Successor node indices, resolving jumps through the jump table and
    // including the on_positive shortcut of sheds.
    std::vector<std::int32_t> successors(std::int32_t idx) const {
        std::vector<std::int32_t> out;
        const Node& n = g.nodes[idx];
        for (const std::int32_t e : g.out_edges[idx]) {
            const std::int32_t t = g.index(g.edges[e].to);
            if (t >= 0) out.push_back(t);
        }
        if (n.kind == NodeKind::Jump) {
            const auto it = g.jumps.find(n.jump_label);
            if (it != g.jumps.end()) {
                const std::int32_t t = g.index(it->second);
                if (t >= 0) out.push_back(t);
            }
        }
        if (n.kind == NodeKind::ServiceShed && n.shed.on_positive >= 0) {
            const std::int32_t t = g.index(n.shed.on_positive);
            if (t >= 0) out.push_back(t);
        }
        return out;
    }
};

void check_structure(const ProcessGraph& g, std::vector<ValidationIssue>& issues) {
    std::set<std::int32_t> seen;
    for (const Node& n : g.nodes) {
        if (!seen.insert(n.id).second) {
            issues.push_back({n.id, "node-id-duplicate", "node id appears more than once"});
        }
        if (n.id < 0) {
            issues.push_back({n.id, "node-id-negative", "node ids must be >= 0"});
        }
    }
    for (const Edge& e : g.edges) {
        if (!g.find(e.from))
            issues.push_back({e.from, "edge-endpoint-missing", "edge 'from' id unknown"});
        if (!g.find(e.to))
            issues.push_back({e.to, "edge-endpoint-missing", "edge 'to' id unknown"});
        if (e.probability < 0.0 || e.probability > 1.0)
            issues.push_back({e.from, "edge-probability-range",
                              "edge probability outside [0,1]"});
        const Node* to = g.find(e.to);
        if (to && to->kind == NodeKind::Source)
            issues.push_back({e.from, "edge-into-source", "edges may not point at a source"});
    }

    int sources = 0, sinks = 0, berths = 0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const Node& n = g.nodes[i];
        const auto& out = g.out_edges[i];
        switch (n.kind) {
            case NodeKind::Source:
                ++sources;
                if (out.size() != 1)
                    issues.push_back({n.id, "source-out-degree",
                                      "source needs exactly one outgoing edge"});
                break;
            case NodeKind::Sink:
                ++sinks;
                if (!out.empty())
                    issues.push_back({n.id, "sink-out-degree", "sink must have no outgoing edges"});
                break;
            case NodeKind::Berth:
                ++berths;
                if (out.size() != 1)
                    issues.push_back({n.id, "berth-out-degree",
                                      "berth needs exactly one outgoing edge"});
                break;
            case NodeKind::Jump: {
                if (!out.empty())
                    issues.push_back({n.id, "jump-out-degree",
                                      "jump nodes route via the jump table, not edges"});
                const auto it = g.jumps.find(n.jump_label);
                if (it == g.jumps.end())
                    issues.push_back({n.id, "jump-target-missing",
                                      "jump label '" + n.jump_label + "' has no target"});
                else if (!g.find(it->second))
                    issues.push_back({n.id, "jump-target-unknown",
                                      "jump label '" + n.jump_label + "' targets unknown node"});
                break;
            }
            case NodeKind::ServiceShed: {
                if (out.size() != 1)
                    issues.push_back({n.id, "shed-out-degree",
                                      "service shed needs exactly one outgoing edge"});
                const ServiceShedSpec& s = n.shed;
                if (s.servers < 1)
                    issues.push_back({n.id, "shed-servers", "servers must be >= 1"});
                if (s.exit_buffers < 1)
                    issues.push_back({n.id, "shed-exit-buffers", "exit_buffers must be >= 1"});
                if (s.queue_capacity && *s.queue_capacity < 1)
                    issues.push_back({n.id, "shed-queue-capacity",
                                      "queue_capacity must be >= 1 or unbounded"});
                if (const auto err = s.service_time.validity_error())
                    issues.push_back({n.id, "shed-service-time", *err});
                if (s.on_positive >= 0) {
                    const Node* t = g.find(s.on_positive);
                    if (!t)
                        issues.push_back({n.id, "shed-on-positive-unknown",
                                          "on_positive targets unknown node"});
                    else if (t->kind == NodeKind::Source)
                        issues.push_back({n.id, "shed-on-positive-source",
                                          "on_positive may not target a source"});
                }
                break;
            }
            case NodeKind::ProbRouter:
                if (out.empty())
                    issues.push_back({n.id, "router-out-degree",
                                      "router needs at least one outgoing edge"});
                break;
            case NodeKind::ShortestQueueRouter:
                if (out.empty())
                    issues.push_back({n.id, "router-out-degree",
                                      "router needs at least one outgoing edge"});
                for (const std::int32_t e : out) {
                    const Node* t = g.find(g.edges[e].to);
                    if (t && t->kind != NodeKind::ServiceShed)
                        issues.push_back({n.id, "sq-candidate-kind",
                                          "shortest-queue candidates must be service sheds"});
                }
                break;
        }
    }
    if (sources != 1)
        issues.push_back({-1, "source-count",
                          "exactly one source is required, found " + std::to_string(sources)});
    if (sinks < 1) issues.push_back({-1, "sink-count", "at least one sink is required"});
    if (berths > 1)
        issues.push_back({-1, "berth-count", "at most one berth is supported"});
}

void check_reachability(const ProcessGraph& g, std::vector<ValidationIssue>& issues) {
    const GraphView view{g};
    const std::size_t n = g.nodes.size();

    std::vector<char> fwd(n, 0);
    std::vector<std::int32_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.nodes[i].kind == NodeKind::Source) {
            fwd[i] = 1;
            stack.push_back(static_cast<std::int32_t>(i));
        }
    }
    while (!stack.empty()) {
        const std::int32_t i = stack.back();
        stack.pop_back();
        for (const std::int32_t s : view.successors(i)) {
            if (!fwd[s]) {
                fwd[s] = 1;
                stack.push_back(s);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!fwd[i])
            issues.push_back({g.nodes[i].id, "node-unreachable",
                              "node not reachable from any source"});
    }

    // Reverse reachability from sinks ("every entry can reach some exit").
    std::vector<std::vector<std::int32_t>> rev(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const std::int32_t s : view.successors(static_cast<std::int32_t>(i))) {
            rev[s].push_back(static_cast<std::int32_t>(i));
        }
    }
    std::vector<char> bwd(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (g.nodes[i].kind == NodeKind::Sink) {
            bwd[i] = 1;
            stack.push_back(static_cast<std::int32_t>(i));
        }
    }
    while (!stack.empty()) {
        const std::int32_t i = stack.back();
        stack.pop_back();
        for (const std::int32_t p : rev[i]) {
            if (!bwd[p]) {
                bwd[p] = 1;
                stack.push_back(p);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (g.nodes[i].kind == NodeKind::Source && !bwd[i])
            issues.push_back({g.nodes[i].id, "source-no-exit",
                              "no sink is reachable from this source"});
    }
}

void check_acyclic(const ProcessGraph& g, std::vector<ValidationIssue>& issues) {
    // Berth recheck is the only sanctioned repetition; the flow graph with
    // Berth outbound edges removed must be a DAG.
    const GraphView view{g};
    const std::size_t n = g.nodes.size();
    std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
    bool cyclic = false;

    struct Frame {
        std::int32_t node;
        std::vector<std::int32_t> succ;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    for (std::size_t start = 0; start < n && !cyclic; ++start) {
        if (state[start] != 0) continue;
        state[start] = 1;
        stack.push_back({static_cast<std::int32_t>(start),
                         g.nodes[start].kind == NodeKind::Berth
                             ? std::vector<std::int32_t>{}
                             : view.successors(static_cast<std::int32_t>(start))});
        while (!stack.empty() && !cyclic) {
            Frame& f = stack.back();
            if (f.next >= f.succ.size()) {
                state[f.node] = 2;
                stack.pop_back();
                continue;
            }
            const std::int32_t s = f.succ[f.next++];
            if (state[s] == 1) {
                issues.push_back({g.nodes[s].id, "graph-cycle",
                                  "cycle through node (non-Berth flow must be acyclic)"});
                cyclic = true;
            } else if (state[s] == 0) {
                state[s] = 1;
                stack.push_back({s, g.nodes[s].kind == NodeKind::Berth
                                        ? std::vector<std::int32_t>{}
                                        : view.successors(s)});
            }
        }
    }
}

// Which sides can physically reach each node, propagated through edge side
// filters. Used to make side totality a load-time property.
std::vector<std::array<char, 2>> side_reach(const ProcessGraph& g) {
    const std::size_t n = g.nodes.size();
    std::vector<std::array<char, 2>> reach(n, {0, 0});
    std::vector<std::int32_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.nodes[i].kind == NodeKind::Source) {
            reach[i] = {1, 1};
            stack.push_back(static_cast<std::int32_t>(i));
        }
    }
    const auto push_side = [&](std::int32_t idx, int side, std::vector<std::int32_t>& st) {
        if (!reach[idx][side]) {
            reach[idx][side] = 1;
            st.push_back(idx);
        }
    };
    while (!stack.empty()) {
        const std::int32_t i = stack.back();
        stack.pop_back();
        const Node& node = g.nodes[i];
        for (int side = 0; side < 2; ++side) {
            if (!reach[i][side]) continue;
            const Side s = side == 0 ? Side::Soft : Side::Hard;
            for (const std::int32_t e : g.out_edges[i]) {
                if (!matches(g.edges[e].side, s)) continue;
                const std::int32_t t = g.index(g.edges[e].to);
                if (t >= 0) push_side(t, side, stack);
            }
            if (node.kind == NodeKind::Jump) {
                const auto it = g.jumps.find(node.jump_label);
                if (it != g.jumps.end()) {
                    const std::int32_t t = g.index(it->second);
                    if (t >= 0) push_side(t, side, stack);
                }
            }
            if (node.kind == NodeKind::ServiceShed && node.shed.on_positive >= 0) {
                const std::int32_t t = g.index(node.shed.on_positive);
                if (t >= 0) push_side(t, side, stack);
            }
        }
    }
    return reach;
}

void check_sides(const ProcessGraph& g, std::vector<ValidationIssue>& issues) {
    const auto reach = side_reach(g);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const Node& n = g.nodes[i];
        for (int side = 0; side < 2; ++side) {
            if (!reach[i][side]) continue;
            const Side s = side == 0 ? Side::Soft : Side::Hard;
            if (n.kind == NodeKind::ServiceShed && !matches(n.shed.applies_to, s)) {
                issues.push_back({n.id, "shed-side-mismatch",
                                  std::string("shed does not apply to ") + to_string(s) +
                                      "-sided lorries that can reach it"});
            }
            if (n.kind == NodeKind::ProbRouter) {
                double sum = 0.0;
                int matching = 0;
                for (const std::int32_t e : g.out_edges[i]) {
                    if (matches(g.edges[e].side, s)) {
                        sum += g.edges[e].probability;
                        ++matching;
                    }
                }
                if (matching == 0) {
                    issues.push_back({n.id, "router-side-total",
                                      std::string("no outgoing edge matches ") + to_string(s) +
                                          "-sided lorries"});
                } else if (std::abs(sum - 1.0) > kProbTol) {
                    issues.push_back({n.id, "router-prob-sum",
                                      std::string("probabilities for ") + to_string(s) +
                                          "-sided lorries sum to " + std::to_string(sum)});
                }
            }
            if (n.kind == NodeKind::ShortestQueueRouter) {
                int matching = 0;
                for (const std::int32_t e : g.out_edges[i]) {
                    if (matches(g.edges[e].side, s)) ++matching;
                }
                if (matching == 0)
                    issues.push_back({n.id, "router-side-total",
                                      std::string("no candidate matches ") + to_string(s) +
                                          "-sided lorries"});
            }
        }
    }
}

}  // namespace

std::vector<ValidationIssue> validate_graph(ProcessGraph& graph) {
    graph.build_index();
    std::vector<ValidationIssue> issues;
    check_structure(graph, issues);
    if (!issues.empty()) return issues;  // later passes assume sound structure
    check_reachability(graph, issues);
    check_acyclic(graph, issues);
    check_sides(graph, issues);
    return issues;
}

std::vector<ValidationIssue> validate_arrivals(const ArrivalSpec& spec) {
    std::vector<ValidationIssue> issues;
    if (spec.base_rate_per_hour < 0)
        issues.push_back({-1, "arrivals-rate", "base rate must be >= 0"});
    if (!spec.weekly_profile.empty() && spec.weekly_profile.size() != 168)
        issues.push_back({-1, "arrivals-profile-size",
                          "weekly profile needs exactly 168 hourly factors"});
    for (const double m : spec.weekly_profile) {
        if (m < 0) {
            issues.push_back({-1, "arrivals-profile-negative",
                              "profile multipliers must be >= 0"});
            break;
        }
    }
    if (spec.clandestine_probability < 0 || spec.clandestine_probability > 1)
        issues.push_back({-1, "arrivals-clandestine-prob",
                          "clandestine probability outside [0,1]"});
    if (spec.soft_fraction < 0 || spec.soft_fraction > 1)
        issues.push_back({-1, "arrivals-soft-fraction", "soft fraction outside [0,1]"});
    if (spec.commodity_labels.empty() ||
        spec.commodity_labels.size() != spec.commodity_weights.size()) {
        issues.push_back({-1, "arrivals-commodity-mix",
                          "commodity labels and weights must be non-empty and aligned"});
        return issues;
    }
    double sum = 0;
    for (const double w : spec.commodity_weights) {
        if (w < 0) issues.push_back({-1, "arrivals-commodity-weight", "weights must be >= 0"});
        sum += w;
    }
    if (std::abs(sum - 1.0) > kProbTol)
        issues.push_back({-1, "arrivals-commodity-sum",
                          "commodity mix sums to " + std::to_string(sum)});
    std::set<std::string> labels(spec.commodity_labels.begin(), spec.commodity_labels.end());
    if (labels.size() != spec.commodity_labels.size())
        issues.push_back({-1, "arrivals-commodity-duplicate", "duplicate commodity label"});
    return issues;
}

std::optional<double> sample_interarrival(const ArrivalSpec& spec, double now,
                                          RandomStream& rng) {
    const double base_per_min = spec.base_rate_per_hour / 60.0;
    const double peak = base_per_min * spec.peak_multiplier;
    if (peak <= 0.0) return std::nullopt;
    if (spec.flat) return rng.exponential(1.0 / peak);

    // Thinning against the peak rate; acceptance probability lambda(t)/peak.
    double t = now;
    for (;;) {
        t += rng.exponential(1.0 / peak);
        const double lambda = base_per_min * spec.multiplier_at(t);
        if (rng.uniform() * peak < lambda) return t - now;
    }
}

std::int32_t route_probabilistic(const ProcessGraph& graph, const Node& router,
                                 const Lorry& lorry, RandomStream& rng) {
    const std::int32_t idx = graph.index(router.id);
    double total = 0.0;
    for (const std::int32_t e : graph.out_edges[idx]) {
        if (matches(graph.edges[e].side, lorry.side)) total += graph.edges[e].probability;
    }
    if (total <= 0.0) {
        throw ModelError("router " + std::to_string(router.id) + " has no edge for a " +
                         to_string(lorry.side) + "-sided lorry");
    }
    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::int32_t last = -1;
    for (const std::int32_t e : graph.out_edges[idx]) {
        const Edge& edge = graph.edges[e];
        if (!matches(edge.side, lorry.side)) continue;
        cum += edge.probability;
        last = edge.to;
        if (u < cum) return edge.to;
    }
    return last;  // u landed in the floating-point residue of the last edge
}

std::int32_t route_shortest_queue(
    const std::vector<std::pair<std::int32_t, int>>& candidates) {
    std::int32_t best = candidates.front().first;
    int best_load = candidates.front().second;
    for (const auto& [id, load] : candidates) {
        if (load < best_load || (load == best_load && id < best)) {
            best = id;
            best_load = load;
        }
    }
    return best;
}

}  // namespace portsim
