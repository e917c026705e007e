#include "portsim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "portsim/errors.hpp"

namespace portsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ParseError(what); }

double require_number(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_number())
        fail(ctx + ": missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_string())
        fail(ctx + ": missing or non-string field '" + key + "'");
    return j[key].get<std::string>();
}

DistributionSpec parse_distribution(const json& j, const std::string& ctx) {
    const std::string family = require_string(j, "family", ctx);
    if (family == "constant") {
        return DistributionSpec::constant(require_number(j, "value", ctx));
    }
    if (family == "exponential") {
        return DistributionSpec::exponential(require_number(j, "mean", ctx));
    }
    if (family == "triangular") {
        return DistributionSpec::triangular(require_number(j, "min", ctx),
                                            require_number(j, "mode", ctx),
                                            require_number(j, "max", ctx));
    }
    if (family == "uniform") {
        return DistributionSpec::uniform(require_number(j, "lo", ctx),
                                         require_number(j, "hi", ctx));
    }
    fail(ctx + ": unknown distribution family '" + family + "'");
}

SideFilter parse_side(const std::string& s, const std::string& ctx) {
    if (s == "soft") return SideFilter::Soft;
    if (s == "hard") return SideFilter::Hard;
    if (s == "both") return SideFilter::Both;
    fail(ctx + ": unknown side filter '" + s + "'");
}

NodeKind parse_kind(const std::string& s, const std::string& ctx) {
    if (s == "source") return NodeKind::Source;
    if (s == "service_shed") return NodeKind::ServiceShed;
    if (s == "prob_router") return NodeKind::ProbRouter;
    if (s == "shortest_queue_router") return NodeKind::ShortestQueueRouter;
    if (s == "jump") return NodeKind::Jump;
    if (s == "berth") return NodeKind::Berth;
    if (s == "sink") return NodeKind::Sink;
    fail(ctx + ": unknown node kind '" + s + "'");
}

Node parse_node(const json& j) {
    Node n;
    if (!j.contains("id") || !j["id"].is_number_integer()) fail("node: missing integer 'id'");
    n.id = j["id"].get<std::int32_t>();
    const std::string ctx = "node " + std::to_string(n.id);
    n.kind = parse_kind(require_string(j, "kind", ctx), ctx);
    n.name = j.value("name", "node" + std::to_string(n.id));

    if (n.kind == NodeKind::Jump) {
        n.jump_label = require_string(j, "label", ctx);
    }
    if (n.kind == NodeKind::ServiceShed) {
        ServiceShedSpec& s = n.shed;
        if (j.contains("sensor") && !j["sensor"].is_null())
            s.sensor = j["sensor"].get<std::string>();
        if (j.contains("queue_capacity") && !j["queue_capacity"].is_null())
            s.queue_capacity = j["queue_capacity"].get<int>();
        s.servers = j.value("servers", 1);
        if (!j.contains("service_time")) fail(ctx + ": shed needs 'service_time'");
        s.service_time = parse_distribution(j["service_time"], ctx + " service_time");
        s.exit_buffers = j.value("exit_buffers", 2);
        if (j.contains("applies_to"))
            s.applies_to = parse_side(j["applies_to"].get<std::string>(), ctx);
        if (j.contains("full_queue_policy")) {
            const std::string p = j["full_queue_policy"].get<std::string>();
            if (p == "block") s.full_queue_policy = FullQueuePolicy::Block;
            else if (p == "drop") s.full_queue_policy = FullQueuePolicy::Drop;
            else fail(ctx + ": unknown full_queue_policy '" + p + "'");
        }
        if (j.contains("on_positive") && !j["on_positive"].is_null())
            s.on_positive = j["on_positive"].get<std::int32_t>();
    }
    return n;
}

void parse_graph(const json& root, ProcessGraph& g) {
    if (!root.contains("nodes") || !root["nodes"].is_array()) fail("missing 'nodes' array");
    for (const json& jn : root["nodes"]) g.nodes.push_back(parse_node(jn));

    if (!root.contains("edges") || !root["edges"].is_array()) fail("missing 'edges' array");
    for (const json& je : root["edges"]) {
        Edge e;
        if (!je.contains("from") || !je.contains("to")) fail("edge: needs 'from' and 'to'");
        e.from = je["from"].get<std::int32_t>();
        e.to = je["to"].get<std::int32_t>();
        e.probability = je.value("p", 1.0);
        if (je.contains("side"))
            e.side = parse_side(je["side"].get<std::string>(), "edge");
        g.edges.push_back(e);
    }

    if (root.contains("jumps")) {
        for (const auto& [label, target] : root["jumps"].items()) {
            if (!target.is_number_integer()) fail("jump '" + label + "': target must be a node id");
            g.jumps.emplace(label, target.get<std::int32_t>());
        }
    }
    g.build_index();
}

void parse_arrivals(const json& root, ArrivalSpec& a) {
    if (!root.contains("arrivals")) fail("missing 'arrivals' section");
    const json& j = root["arrivals"];
    a.base_rate_per_hour = require_number(j, "base_rate_per_hour", "arrivals");
    if (j.contains("weekly_profile")) {
        a.weekly_profile = j["weekly_profile"].get<std::vector<double>>();
    }
    a.clandestine_probability = require_number(j, "clandestine_probability", "arrivals");
    a.soft_fraction = require_number(j, "soft_fraction", "arrivals");
    a.commodity_labels.clear();
    a.commodity_weights.clear();
    if (j.contains("commodity_mix")) {
        if (!j["commodity_mix"].is_object()) fail("arrivals: commodity_mix must be an object");
        for (const auto& [label, w] : j["commodity_mix"].items()) {
            a.commodity_labels.push_back(label);
            a.commodity_weights.push_back(w.get<double>());
        }
    } else {
        a.commodity_labels = {"general"};
        a.commodity_weights = {1.0};
    }
    a.finalize();
}

void parse_drm(const json& root, Scenario& sc) {
    if (!root.contains("drm")) fail("missing 'drm' section");
    const json& j = root["drm"];
    if (!j.contains("default")) fail("drm: missing 'default' profile");
    DetectionProfile def{require_number(j["default"], "tp", "drm default"),
                         require_number(j["default"], "fp", "drm default")};
    sc.drm = Drm(def);
    if (j.contains("scenario") && !j["scenario"].is_null())
        sc.drm_scenario_label = j["scenario"].get<std::string>();

    if (j.contains("entries")) {
        int i = 0;
        for (const json& je : j["entries"]) {
            const std::string ctx = "drm entry " + std::to_string(i++);
            if (!je.contains("level") || !je["level"].is_number_integer())
                fail(ctx + ": missing integer 'level'");
            const int level = je["level"].get<int>();
            if (level < 1 || level > 3) fail(ctx + ": level must be 1, 2 or 3");
            DrmKey key;
            key.threat = je.value("threat", "clandestine");
            if (je.contains("containment") && !je["containment"].is_null())
                key.containment = je["containment"].get<std::string>();
            if (je.contains("commodity") && !je["commodity"].is_null())
                key.commodity = je["commodity"].get<std::string>();
            if (je.contains("sensor") && !je["sensor"].is_null())
                key.sensor = je["sensor"].get<std::string>();
            if (je.contains("scenario") && !je["scenario"].is_null())
                key.scenario = je["scenario"].get<std::string>();
            if (je.contains("wall_thickness_mm"))
                key.wall_thickness_mm = je["wall_thickness_mm"].get<double>();
            if (je.contains("wall_density_kgm3"))
                key.wall_density_kgm3 = je["wall_density_kgm3"].get<double>();
            const DetectionProfile profile{require_number(je, "tp", ctx),
                                           require_number(je, "fp", ctx)};

            if (level == 3 && (!key.containment || !key.commodity || key.sensor.empty()))
                fail(ctx + ": level 3 needs containment, commodity and sensor");
            if (level == 2 && (!key.commodity || key.sensor.empty()))
                fail(ctx + ": level 2 needs commodity and sensor");
            if (level == 1 && (!key.commodity || !key.scenario))
                fail(ctx + ": level 1 needs commodity and scenario");
            if (!profile.valid()) fail(ctx + ": tp/fp outside [0,1]");

            if (!sc.drm.add_entry(static_cast<DrmLevel>(level), key, profile))
                fail(ctx + ": duplicate key at this level");
        }
    }

    if (j.contains("load_modifier")) {
        const json& lm = j["load_modifier"];
        sc.load_modifier.alpha = lm.value("alpha", 0.0);
        sc.load_modifier.q0 = lm.value("q0", 0);
        sc.load_modifier.floor = lm.value("floor", 0.0);
    }
}

void parse_berth(const json& root, Scenario& sc) {
    if (!root.contains("berth")) {
        if (sc.has_berth_node()) fail("graph has a berth node but no 'berth' section");
        return;
    }
    const json& j = root["berth"];
    const std::string mode = j.value("mode", "check_once");
    if (mode == "check_once") sc.berth.mode = BerthMode::CheckOnce;
    else if (mode == "recheck") sc.berth.mode = BerthMode::Recheck;
    else fail("berth: unknown mode '" + mode + "'");
    if (!j.contains("dwell_time")) fail("berth: missing 'dwell_time'");
    sc.berth.dwell_time = parse_distribution(j["dwell_time"], "berth dwell_time");
    if (j.contains("squads")) {
        for (const json& js : j["squads"]) {
            SquadSpec squad;
            if (!js.contains("check_interval")) fail("berth squad: missing 'check_interval'");
            squad.check_interval = parse_distribution(js["check_interval"], "squad interval");
            squad.soft_sensor = js.value("soft_sensor", std::string("CO2-mobile"));
            squad.hard_action = js.value("hard_action", std::string("Visual"));
            sc.berth.squads.push_back(squad);
        }
    }
}

void parse_run(const json& root, RunSettings& r) {
    if (!root.contains("run")) return;
    const json& j = root["run"];
    r.horizon_min = j.value("horizon_min", r.horizon_min);
    r.seed = j.value("seed", r.seed);
    r.replications = j.value("replications", r.replications);
    r.obs_window_min = j.value("obs_window_min", r.obs_window_min);
    if (j.contains("max_arrivals") && !j["max_arrivals"].is_null())
        r.max_arrivals = j["max_arrivals"].get<std::int64_t>();
    r.confidence = j.value("confidence", r.confidence);
}

char hex_digit(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

}  // namespace

Scenario load_scenario_from_string(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        fail(origin + ": " + e.what());
    }

    Scenario sc;
    sc.source_path = origin;
    sc.name = root.value("name", origin);
    try {
        parse_graph(root, sc.graph);
        parse_arrivals(root, sc.arrivals);
        parse_drm(root, sc);
        parse_berth(root, sc);
        parse_run(root, sc.run);
    } catch (const json::exception& e) {
        fail(origin + ": " + e.what());
    }

    // Content hash over the canonical (key-sorted) dump, so formatting noise
    // does not change the reported identity.
    const std::string canon = root.dump();
    const std::uint64_t h = fnv1a64(canon);
    sc.hash_hex.clear();
    for (int i = 15; i >= 0; --i) sc.hash_hex.push_back(hex_digit((h >> (4 * i)) & 0xF));
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario_from_string(buf.str(), path);
}

std::vector<ValidationIssue> validate_scenario(Scenario& sc) {
    std::vector<ValidationIssue> issues = validate_graph(sc.graph);
    for (const auto& i : validate_arrivals(sc.arrivals)) issues.push_back(i);
    if (sc.has_berth_node()) {
        for (const auto& i : validate_berth(sc.berth)) issues.push_back(i);
        if (sc.berth.squads.empty())
            issues.push_back({-1, "berth-no-squads",
                              "graph has a berth node but no squads are configured"});
    }
    if (!sc.load_modifier.valid())
        issues.push_back({-1, "load-modifier", "alpha must be >= 0 and floor in [0,1]"});
    if (sc.run.horizon_min < 0)
        issues.push_back({-1, "run-horizon", "horizon must be >= 0"});
    if (sc.run.replications < 1)
        issues.push_back({-1, "run-replications", "replications must be >= 1"});
    if (sc.run.obs_window_min <= 0)
        issues.push_back({-1, "run-obs-window", "observation window must be > 0"});
    if (sc.run.confidence <= 0 || sc.run.confidence >= 1)
        issues.push_back({-1, "run-confidence", "confidence must be in (0,1)"});
    return issues;
}

std::vector<DrmKey> drm_universe(const Scenario& sc) {
    std::set<std::string> sensors;
    for (const Node& n : sc.graph.nodes) {
        if (n.kind == NodeKind::ServiceShed && !n.shed.sensor.empty())
            sensors.insert(n.shed.sensor);
    }
    for (const SquadSpec& squad : sc.berth.squads) {
        sensors.insert(squad.soft_sensor);
        sensors.insert(squad.hard_action);
    }
    std::vector<DrmKey> universe;
    for (const std::string& sensor : sensors) {
        for (const char* side : {"soft", "hard"}) {
            for (const std::string& commodity : sc.arrivals.commodity_labels) {
                DrmKey key;
                key.containment = side;
                key.commodity = commodity;
                key.threat = "clandestine";
                key.sensor = sensor;
                key.scenario = sc.drm_scenario_label;
                universe.push_back(key);
            }
        }
    }
    return universe;
}

}  // namespace portsim
