#include "portsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace portsim {

AnalyticNet AnalyticNet::with_tp(double p) const {
    AnalyticNet copy = *this;
    for (AnalyticNode& n : copy.nodes) {
        if (n.kind == AnalyticNode::Kind::Stage) n.tp = p;
    }
    return copy;
}

int AnalyticNet::add_stage(const std::string& label, double tp, int next,
                           int on_positive) {
    AnalyticNode n;
    n.kind = AnalyticNode::Kind::Stage;
    n.label = label;
    n.tp = tp;
    n.next = next;
    n.on_positive = on_positive;
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size() - 1);
}

int AnalyticNet::add_split(const std::vector<std::pair<double, int>>& branches) {
    AnalyticNode n;
    n.kind = AnalyticNode::Kind::Split;
    n.branches = branches;
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size() - 1);
}

int AnalyticNet::add_terminal() {
    nodes.push_back(AnalyticNode{});
    return static_cast<int>(nodes.size() - 1);
}

namespace {

void check_acyclic(const AnalyticNet& net) {
    const int n = static_cast<int>(net.nodes.size());
    std::vector<int> state(n, 0);
    const std::function<void(int)> visit = [&](int i) {
        if (i < 0 || i >= n) throw OracleError("analytic net references a missing node");
        if (state[i] == 1) throw OracleError("analytic net is cyclic");
        if (state[i] == 2) return;
        state[i] = 1;
        const AnalyticNode& node = net.nodes[i];
        switch (node.kind) {
            case AnalyticNode::Kind::Stage:
                visit(node.next);
                if (node.on_positive >= 0) visit(node.on_positive);
                break;
            case AnalyticNode::Kind::Split:
                for (const auto& [p, t] : node.branches) visit(t);
                break;
            case AnalyticNode::Kind::Terminal:
                break;
        }
        state[i] = 2;
    };
    visit(net.root);
}

}  // namespace

double analytic_detection(const AnalyticNet& net, std::int64_t max_paths) {
    check_acyclic(net);
    std::int64_t paths = 0;
    double missed_mass = 0.0;   // sum over paths of P(path) * prod(1 - tp)
    double path_mass = 0.0;     // sum over paths of P(path), must come to 1

    const std::function<void(int, double, double)> walk =
        [&](int i, double prob, double miss) {
            const AnalyticNode& node = net.nodes[i];
            switch (node.kind) {
                case AnalyticNode::Kind::Stage:
                    walk(node.next, prob, miss * (1.0 - node.tp));
                    return;
                case AnalyticNode::Kind::Split:
                    for (const auto& [p, t] : node.branches) walk(t, prob * p, miss);
                    return;
                case AnalyticNode::Kind::Terminal:
                    if (++paths > max_paths)
                        throw OracleError("path count cap exceeded (" +
                                          std::to_string(max_paths) + ")");
                    missed_mass += prob * miss;
                    path_mass += prob;
                    return;
            }
        };
    walk(net.root, 1.0, 1.0);
    if (std::abs(path_mass - 1.0) > 1e-9)
        throw OracleError("path probabilities sum to " + std::to_string(path_mass));
    return 1.0 - missed_mass;
}

double analytic_detection_outcome_tree(const AnalyticNet& net, std::int64_t max_leaves) {
    check_acyclic(net);
    std::int64_t leaves = 0;
    double detected_mass = 0.0;
    double sink_mass = 0.0;

    const std::function<void(int, double, bool)> walk = [&](int i, double mass,
                                                            bool detected) {
        const AnalyticNode& node = net.nodes[i];
        switch (node.kind) {
            case AnalyticNode::Kind::Stage: {
                if (detected) {
                    // Threat already removed; the stage no longer branches the
                    // detection outcome.
                    walk(node.next, mass, true);
                    return;
                }
                const int positive_next =
                    node.on_positive >= 0 ? node.on_positive : node.next;
                if (node.tp > 0.0) walk(positive_next, mass * node.tp, true);
                if (node.tp < 1.0) walk(node.next, mass * (1.0 - node.tp), false);
                return;
            }
            case AnalyticNode::Kind::Split:
                for (const auto& [p, t] : node.branches) {
                    if (p > 0.0) walk(t, mass * p, detected);
                }
                return;
            case AnalyticNode::Kind::Terminal:
                if (++leaves > max_leaves)
                    throw OracleError("outcome-tree leaf cap exceeded (" +
                                      std::to_string(max_leaves) + ")");
                sink_mass += mass;
                if (detected) detected_mass += mass;
                return;
        }
    };
    walk(net.root, 1.0, false);
    if (std::abs(sink_mass - 1.0) > 1e-9)
        throw OracleError("outcome-tree mass sums to " + std::to_string(sink_mass));
    return detected_mass;
}

int min_stage_count(const AnalyticNet& net) {
    check_acyclic(net);
    const std::function<int(int)> walk = [&](int i) -> int {
        const AnalyticNode& node = net.nodes[i];
        switch (node.kind) {
            case AnalyticNode::Kind::Stage:
                return 1 + walk(node.next);
            case AnalyticNode::Kind::Split: {
                int best = std::numeric_limits<int>::max();
                for (const auto& [p, t] : node.branches) {
                    if (p > 0.0) best = std::min(best, walk(t));
                }
                return best == std::numeric_limits<int>::max() ? 0 : best;
            }
            case AnalyticNode::Kind::Terminal:
                return 0;
        }
        return 0;
    };
    return walk(net.root);
}

namespace {

CurveVerdict verdict_from_curve(const std::vector<double>& values,
                                const std::vector<double>& p_values, int min_stages) {
    constexpr double kTol = 1e-12;
    CurveVerdict v;
    v.values = values;
    v.min_stages = min_stages;
    v.monotone = true;
    v.concave = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1] - kTol) v.monotone = false;
    }
    for (std::size_t i = 2; i < values.size(); ++i) {
        const double d1 = values[i - 1] - values[i - 2];
        const double d2 = values[i] - values[i - 1];
        if (d2 > d1 + kTol) v.concave = false;
    }
    v.above_diagonal_applicable = min_stages >= 2;
    if (v.above_diagonal_applicable) {
        v.above_diagonal = true;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (p_values[i] > kTol && p_values[i] < 1.0 - kTol &&
                values[i] < p_values[i] - kTol)
                v.above_diagonal = false;
        }
    }
    return v;
}

}  // namespace

CurveVerdict concavity_check(const AnalyticNet& net, const std::vector<double>& p_values) {
    std::vector<double> values;
    values.reserve(p_values.size());
    for (const double p : p_values) values.push_back(analytic_detection(net.with_tp(p)));
    return verdict_from_curve(values, p_values, min_stage_count(net));
}

// ---------------------------------------------------------------------------
// Scenario reduction
// ---------------------------------------------------------------------------

namespace {

struct Reducer {
    const Scenario& sc;
    Side side;
    std::int32_t commodity;
    AnalyticNet net;
    std::map<std::int32_t, int> memo;  // graph node index -> analytic index
    std::vector<char> in_progress;

    Reducer(const Scenario& s, Side sd, std::int32_t c)
        : sc(s), side(sd), commodity(c), in_progress(s.graph.nodes.size(), 0) {}

    double stage_tp(const std::string& sensor) const {
        DrmKey key;
        key.containment = side == Side::Soft ? "soft" : "hard";
        key.commodity = sc.arrivals.commodity_labels[commodity];
        key.threat = "clandestine";
        key.sensor = sensor;
        key.scenario = sc.drm_scenario_label;
        return sc.drm.lookup(key).profile.tp_rate;
    }

    int build(std::int32_t node_index) {
        const auto hit = memo.find(node_index);
        if (hit != memo.end()) return hit->second;
        if (in_progress[node_index])
            throw OracleError("cycle through node " +
                              std::to_string(sc.graph.nodes[node_index].id) +
                              " in the acyclic reduction");
        in_progress[node_index] = 1;
        const int result = build_uncached(node_index);
        in_progress[node_index] = 0;
        memo.emplace(node_index, result);
        return result;
    }

    std::int32_t single_target(std::int32_t node_index) const {
        const auto& out = sc.graph.out_edges[node_index];
        return sc.graph.index(sc.graph.edges[out.front()].to);
    }

    int build_uncached(std::int32_t node_index) {
        const ProcessGraph& g = sc.graph;
        const Node& node = g.nodes[node_index];
        switch (node.kind) {
            case NodeKind::Source:
                return build(single_target(node_index));
            case NodeKind::Sink:
                return net.add_terminal();
            case NodeKind::Jump:
                return build(g.index(g.jumps.at(node.jump_label)));
            case NodeKind::Berth:
                // Excluded from the analytic reduction: repeated random checks
                // over a random dwell have no exact closed form here.
                return build(single_target(node_index));
            case NodeKind::ServiceShed: {
                const int next = build(single_target(node_index));
                if (node.shed.sensor.empty()) return next;
                const int on_positive =
                    node.shed.on_positive >= 0 ? build(g.index(node.shed.on_positive)) : -1;
                return net.add_stage(node.name, stage_tp(node.shed.sensor), next,
                                     on_positive);
            }
            case NodeKind::ProbRouter: {
                std::vector<std::pair<double, int>> branches;
                double total = 0.0;
                for (const std::int32_t e : g.out_edges[node_index]) {
                    const Edge& edge = g.edges[e];
                    if (!matches(edge.side, side) || edge.probability <= 0.0) continue;
                    branches.emplace_back(edge.probability, build(g.index(edge.to)));
                    total += edge.probability;
                }
                if (branches.empty())
                    throw OracleError("router " + std::to_string(node.id) +
                                      " has no branch for this class");
                for (auto& [p, t] : branches) p /= total;
                if (branches.size() == 1) return branches.front().second;
                return net.add_split(branches);
            }
            case NodeKind::ShortestQueueRouter: {
                std::vector<std::int32_t> candidates;
                for (const std::int32_t e : g.out_edges[node_index]) {
                    const Edge& edge = g.edges[e];
                    if (matches(edge.side, side)) candidates.push_back(g.index(edge.to));
                }
                if (candidates.empty())
                    throw OracleError("router " + std::to_string(node.id) +
                                      " has no candidate for this class");
                const Node& first = g.nodes[candidates.front()];
                for (const std::int32_t c : candidates) {
                    const Node& cand = g.nodes[c];
                    if (cand.shed.sensor != first.shed.sensor ||
                        cand.shed.on_positive != first.shed.on_positive ||
                        g.edges[g.out_edges[c].front()].to !=
                            g.edges[g.out_edges[candidates.front()].front()].to) {
                        throw OracleError(
                            "shortest-queue candidates at router " +
                            std::to_string(node.id) +
                            " are not detection-equivalent; no exact reduction");
                    }
                }
                return build(candidates.front());
            }
        }
        throw OracleError("unhandled node kind in reduction");
    }
};

}  // namespace

std::vector<ClassNet> reduce_scenario(const Scenario& sc) {
    std::int32_t source_index = -1;
    for (std::size_t i = 0; i < sc.graph.nodes.size(); ++i) {
        if (sc.graph.nodes[i].kind == NodeKind::Source)
            source_index = static_cast<std::int32_t>(i);
    }
    if (source_index < 0) throw OracleError("scenario has no source");

    std::vector<ClassNet> classes;
    for (int s = 0; s < 2; ++s) {
        const Side side = s == 0 ? Side::Soft : Side::Hard;
        const double side_w =
            side == Side::Soft ? sc.arrivals.soft_fraction : 1.0 - sc.arrivals.soft_fraction;
        if (side_w <= 0.0) continue;
        for (std::size_t c = 0; c < sc.arrivals.commodity_labels.size(); ++c) {
            const double w = side_w * sc.arrivals.commodity_weights[c];
            if (w <= 0.0) continue;
            Reducer r(sc, side, static_cast<std::int32_t>(c));
            r.net.root = r.build(source_index);
            ClassNet cn;
            cn.weight = w;
            cn.label = std::string(to_string(side)) + ":" + sc.arrivals.commodity_labels[c];
            cn.net = std::move(r.net);
            classes.push_back(std::move(cn));
        }
    }
    if (classes.empty()) throw OracleError("no lorry class has positive weight");
    return classes;
}

double mixed_detection(const std::vector<ClassNet>& classes,
                       std::optional<double> override_p) {
    double total_w = 0.0, total = 0.0;
    for (const ClassNet& c : classes) {
        const double d = override_p ? analytic_detection(c.net.with_tp(*override_p))
                                    : analytic_detection(c.net);
        total += c.weight * d;
        total_w += c.weight;
    }
    return total / total_w;
}

CurveVerdict mixed_concavity(const std::vector<ClassNet>& classes,
                             const std::vector<double>& p_values) {
    std::vector<double> values;
    values.reserve(p_values.size());
    for (const double p : p_values) values.push_back(mixed_detection(classes, p));
    int min_stages = std::numeric_limits<int>::max();
    for (const ClassNet& c : classes)
        min_stages = std::min(min_stages, min_stage_count(c.net));
    return verdict_from_curve(values, p_values, min_stages);
}

}  // namespace portsim
