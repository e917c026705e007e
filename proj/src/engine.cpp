#include "portsim/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "portsim/errors.hpp"

namespace portsim {

std::optional<double> detection_fraction(const RunCounters& rc) {
    const std::int64_t completed = rc.detected + rc.missed;
    if (completed <= 0) return std::nullopt;
    return static_cast<double>(rc.detected) / static_cast<double>(completed);
}

namespace {

struct ShedState {
    std::int32_t node_index = -1;
    int capacity = -1;  // -1: unbounded
    std::deque<std::int32_t> queue;  // lorry slots
    int in_service = 0;
    int exit_occupied = 0;  // lorries sitting in exit buffers
    int exit_reserved = 0;  // slots reserved by in-service lorries

    struct Waiter {
        std::int32_t slot;
        std::int32_t holder_shed;  // shed state index holding an exit slot, or -1
    };
    std::deque<Waiter> waiters;  // blocked transfers into this shed, FIFO

    double area_queue = 0.0;
    double area_system = 0.0;
    double area_busy = 0.0;
    double last_t = 0.0;
    std::int64_t admitted = 0;
    std::int64_t completed = 0;
    std::int64_t balked = 0;
};

class Engine {
public:
    Engine(const Scenario& sc, std::uint64_t master_seed, std::uint64_t replication,
           double horizon)
        : sc_(sc),
          graph_(sc.graph),
          horizon_(horizon),
          arrivals_rng_(make_stream(master_seed, replication, "arrivals")),
          attributes_rng_(make_stream(master_seed, replication, "attributes")),
          service_rng_(make_stream(master_seed, replication, "service")),
          routing_rng_(make_stream(master_seed, replication, "routing")),
          screening_rng_(make_stream(master_seed, replication, "screening")),
          berth_rng_(make_stream(master_seed, replication, "berth")),
          berth_state_(sc.berth.mode) {
        build_runtime();
    }

    RunCounters run();

private:
    // --- static model data -------------------------------------------------
    const Scenario& sc_;
    const ProcessGraph& graph_;
    double horizon_;

    std::vector<std::int32_t> shed_of_node_;   // node index -> shed state index or -1
    std::vector<std::int32_t> jump_target_;    // node index -> jump target node index
    std::vector<ShedState> sheds_;
    std::vector<std::vector<DetectionProfile>> shed_profiles_;  // [shed][side*C+c]
    std::vector<std::array<std::vector<DetectionProfile>, 2>> squad_profiles_;
    std::int32_t source_index_ = -1;
    std::int32_t source_target_ = -1;
    std::int32_t berth_index_ = -1;
    std::int32_t berth_target_ = -1;

    // --- run state ---------------------------------------------------------
    SimClock clock_;
    EventCalendar cal_;
    RandomStream arrivals_rng_, attributes_rng_, service_rng_, routing_rng_,
        screening_rng_, berth_rng_;
    BerthState berth_state_;
    std::map<std::int64_t, std::int32_t> berth_slot_of_;

    std::vector<Lorry> pool_;
    std::vector<char> in_use_;
    std::vector<std::int32_t> free_slots_;
    std::int64_t next_lorry_id_ = 0;
    bool source_done_ = false;

    RunCounters rc_;
    double next_window_ = 0.0;
    std::int64_t window_prev_detected_ = 0;
    std::int64_t window_prev_missed_ = 0;
    std::vector<double> window_prev_area_;

    enum class Deliver { Placed, Waitlisted };

    // --- setup ---------------------------------------------------------

    void build_runtime() {
        const std::size_t n = graph_.nodes.size();
        shed_of_node_.assign(n, -1);
        jump_target_.assign(n, -1);
        const std::size_t commodities = sc_.arrivals.commodity_labels.size();

        for (std::size_t i = 0; i < n; ++i) {
            const Node& node = graph_.nodes[i];
            switch (node.kind) {
                case NodeKind::ServiceShed: {
                    ShedState st;
                    st.node_index = static_cast<std::int32_t>(i);
                    st.capacity = node.shed.queue_capacity ? *node.shed.queue_capacity : -1;
                    shed_of_node_[i] = static_cast<std::int32_t>(sheds_.size());
                    sheds_.push_back(std::move(st));

                    std::vector<DetectionProfile> profiles;
                    if (!node.shed.sensor.empty()) {
                        profiles.resize(2 * commodities);
                        for (int side = 0; side < 2; ++side) {
                            for (std::size_t c = 0; c < commodities; ++c) {
                                profiles[side * commodities + c] =
                                    lookup_profile(side == 0 ? Side::Soft : Side::Hard,
                                                   static_cast<std::int32_t>(c),
                                                   node.shed.sensor);
                            }
                        }
                    }
                    shed_profiles_.push_back(std::move(profiles));
                    break;
                }
                case NodeKind::Jump: {
                    const auto it = graph_.jumps.find(node.jump_label);
                    jump_target_[i] = graph_.index(it->second);
                    break;
                }
                case NodeKind::Source:
                    source_index_ = static_cast<std::int32_t>(i);
                    source_target_ =
                        graph_.index(graph_.edges[graph_.out_edges[i].front()].to);
                    break;
                case NodeKind::Berth:
                    berth_index_ = static_cast<std::int32_t>(i);
                    berth_target_ =
                        graph_.index(graph_.edges[graph_.out_edges[i].front()].to);
                    break;
                default:
                    break;
            }
        }

        squad_profiles_.resize(sc_.berth.squads.size());
        for (std::size_t q = 0; q < sc_.berth.squads.size(); ++q) {
            const SquadSpec& squad = sc_.berth.squads[q];
            for (int side = 0; side < 2; ++side) {
                auto& per_side = squad_profiles_[q][side];
                per_side.resize(commodities);
                const std::string& sensor =
                    side == 0 ? squad.soft_sensor : squad.hard_action;
                for (std::size_t c = 0; c < commodities; ++c) {
                    per_side[c] = lookup_profile(side == 0 ? Side::Soft : Side::Hard,
                                                 static_cast<std::int32_t>(c), sensor);
                }
            }
        }
        window_prev_area_.assign(sheds_.size(), 0.0);
    }

    DetectionProfile lookup_profile(Side side, std::int32_t commodity,
                                    const std::string& sensor) const {
        DrmKey key;
        key.containment = side == Side::Soft ? "soft" : "hard";
        key.commodity = sc_.arrivals.commodity_labels[commodity];
        key.threat = "clandestine";
        key.sensor = sensor;
        key.scenario = sc_.drm_scenario_label;
        return sc_.drm.lookup(key).profile;
    }

    // --- lorry pool ------------------------------------------------------

    std::int32_t alloc_lorry() {
        if (!free_slots_.empty()) {
            const std::int32_t slot = free_slots_.back();
            free_slots_.pop_back();
            pool_[slot] = Lorry{};
            in_use_[slot] = 1;
            return slot;
        }
        pool_.emplace_back();
        in_use_.push_back(1);
        return static_cast<std::int32_t>(pool_.size() - 1);
    }

    void free_lorry(std::int32_t slot) {
        in_use_[slot] = 0;
        free_slots_.push_back(slot);
    }

    // --- statistics helpers ----------------------------------------------

    void advance_stats(ShedState& st) {
        const double dt = clock_.now - st.last_t;
        if (dt > 0) {
            const auto q = static_cast<double>(st.queue.size());
            st.area_queue += q * dt;
            st.area_system += (q + st.in_service) * dt;
            st.area_busy += st.in_service * dt;
            st.last_t = clock_.now;
        } else {
            st.last_t = clock_.now;
        }
    }

    void count_detection(std::int32_t node_id, const std::string& sensor, Lorry& lorry) {
        lorry.clandestine_aboard = false;
        ++rc_.detected;
        ++rc_.detected_by[{node_id, sensor}];
    }

    // --- node dynamics ----------------------------------------------------

    Deliver deliver(std::int32_t slot, std::int32_t node_index,
                    std::int32_t holder_shed) {
        Lorry& lorry = pool_[slot];
        for (;;) {
            const Node& node = graph_.nodes[node_index];
            switch (node.kind) {
                case NodeKind::Jump:
                    node_index = jump_target_[node_index];
                    break;
                case NodeKind::ProbRouter:
                    node_index =
                        graph_.index(route_probabilistic(graph_, node, lorry, routing_rng_));
                    break;
                case NodeKind::ShortestQueueRouter: {
                    std::vector<std::pair<std::int32_t, int>> candidates;
                    for (const std::int32_t e : graph_.out_edges[node_index]) {
                        const Edge& edge = graph_.edges[e];
                        if (!matches(edge.side, lorry.side)) continue;
                        const std::int32_t t = graph_.index(edge.to);
                        const ShedState& st = sheds_[shed_of_node_[t]];
                        candidates.emplace_back(edge.to,
                                                static_cast<int>(st.queue.size()) +
                                                    st.in_service);
                    }
                    if (candidates.empty()) {
                        throw ModelError("router " + std::to_string(node.id) +
                                         " has no candidate for a " +
                                         std::string(to_string(lorry.side)) +
                                         "-sided lorry");
                    }
                    node_index = graph_.index(route_shortest_queue(candidates));
                    break;
                }
                case NodeKind::ServiceShed:
                    return shed_accept(shed_of_node_[node_index], slot, holder_shed);
                case NodeKind::Berth:
                    berth_park(slot);
                    return Deliver::Placed;
                case NodeKind::Sink:
                    exit_system(slot);
                    return Deliver::Placed;
                case NodeKind::Source:
                    throw ModelError("lorry routed into a source node");
            }
        }
    }

    Deliver shed_accept(std::int32_t shed_index, std::int32_t slot,
                        std::int32_t holder_shed) {
        ShedState& st = sheds_[shed_index];
        advance_stats(st);
        if (st.capacity >= 0 &&
            static_cast<int>(st.queue.size()) >= st.capacity) {
            const Node& node = graph_.nodes[st.node_index];
            if (node.shed.full_queue_policy == FullQueuePolicy::Drop) {
                ++st.balked;
                ++rc_.balked;
                pool_[slot].exited_at = clock_.now;
                free_lorry(slot);
                return Deliver::Placed;  // the lorry is gone, holders are free
            }
            st.waiters.push_back({slot, holder_shed});
            return Deliver::Waitlisted;
        }
        st.queue.push_back(slot);
        ++st.admitted;
        try_start_service(shed_index);
        return Deliver::Placed;
    }

    void try_start_service(std::int32_t shed_index) {
        ShedState& st = sheds_[shed_index];
        const Node& node = graph_.nodes[st.node_index];
        while (!st.queue.empty() && st.in_service < node.shed.servers &&
               st.exit_occupied + st.exit_reserved < node.shed.exit_buffers) {
            advance_stats(st);
            const std::int32_t slot = st.queue.front();
            st.queue.pop_front();
            ++st.in_service;
            ++st.exit_reserved;
            const double service = node.shed.service_time.sample(service_rng_);
            cal_.schedule({clock_.now + service, 0, EventKind::ServiceEnd, st.node_index,
                           slot, pool_[slot].id},
                          clock_);
            // A freed queue slot admits the oldest blocked transfer.
            while (!st.waiters.empty() &&
                   (st.capacity < 0 ||
                    static_cast<int>(st.queue.size()) < st.capacity)) {
                const ShedState::Waiter w = st.waiters.front();
                st.waiters.pop_front();
                st.queue.push_back(w.slot);
                ++st.admitted;
                if (w.holder_shed >= 0) release_exit_slot(w.holder_shed);
            }
        }
    }

    void release_exit_slot(std::int32_t shed_index) {
        ShedState& st = sheds_[shed_index];
        advance_stats(st);
        --st.exit_occupied;
        try_start_service(shed_index);
    }

    void handle_service_end(std::int32_t node_index, std::int32_t slot) {
        const std::int32_t shed_index = shed_of_node_[node_index];
        ShedState& st = sheds_[shed_index];
        const Node& node = graph_.nodes[node_index];
        advance_stats(st);
        --st.in_service;
        --st.exit_reserved;
        ++st.exit_occupied;
        ++st.completed;

        Lorry& lorry = pool_[slot];
        if (!node.shed.sensor.empty()) {
            DetectionProfile profile =
                shed_profiles_[shed_index][(lorry.side == Side::Soft ? 0 : 1) *
                                               sc_.arrivals.commodity_labels.size() +
                                           lorry.commodity];
            if (sc_.load_modifier.alpha > 0.0) {
                profile.tp_rate = effective_tp(
                    profile, static_cast<int>(st.queue.size()), sc_.load_modifier);
            }
            const ScreeningOutcome outcome = resolve_screening(
                lorry, profile, screening_rng_, node.id, node.shed.sensor, clock_.now);
            if (outcome == ScreeningOutcome::TruePositive) {
                count_detection(node.id, node.shed.sensor, lorry);
            } else if (outcome == ScreeningOutcome::FalsePositive) {
                ++rc_.false_positives;
            }
        }

        std::int32_t dest;
        if (lorry.flagged && node.shed.on_positive >= 0) {
            dest = graph_.index(node.shed.on_positive);
        } else {
            dest = graph_.index(graph_.edges[graph_.out_edges[node_index].front()].to);
        }
        if (deliver(slot, dest, shed_index) == Deliver::Placed) {
            advance_stats(st);
            --st.exit_occupied;
        }
        try_start_service(shed_index);
    }

    // --- source -------------------------------------------------------

    void schedule_next_arrival() {
        if (sc_.run.max_arrivals && rc_.arrivals >= *sc_.run.max_arrivals) {
            source_done_ = true;
            return;
        }
        const auto gap = sample_interarrival(sc_.arrivals, clock_.now, arrivals_rng_);
        if (!gap) {
            source_done_ = true;
            return;
        }
        cal_.schedule({clock_.now + *gap, 0, EventKind::Arrival, source_index_, -1, -1},
                      clock_);
    }

    void handle_arrival() {
        const std::int32_t slot = alloc_lorry();
        Lorry& lorry = pool_[slot];
        lorry.id = next_lorry_id_++;
        lorry.created_at = clock_.now;
        lorry.side = attributes_rng_.bernoulli(sc_.arrivals.soft_fraction) ? Side::Soft
                                                                           : Side::Hard;
        lorry.commodity = draw_commodity();
        lorry.clandestine_aboard =
            attributes_rng_.bernoulli(sc_.arrivals.clandestine_probability);

        ++rc_.arrivals;
        if (lorry.clandestine_aboard) ++rc_.clandestine_arrivals;

        deliver(slot, source_target_, -1);
        schedule_next_arrival();
    }

    std::int32_t draw_commodity() {
        const auto& weights = sc_.arrivals.commodity_weights;
        if (weights.size() == 1) return 0;
        const double u = attributes_rng_.uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            cum += weights[i];
            if (u < cum) return static_cast<std::int32_t>(i);
        }
        return static_cast<std::int32_t>(weights.size() - 1);
    }

    // --- berth ----------------------------------------------------------

    void berth_park(std::int32_t slot) {
        const Lorry& lorry = pool_[slot];
        berth_state_.arrive(lorry.id, clock_.now);
        berth_slot_of_.emplace(lorry.id, slot);
        const double dwell = sc_.berth.dwell_time.sample(berth_rng_);
        cal_.schedule({clock_.now + dwell, 0, EventKind::BerthDeparture, berth_index_,
                       slot, lorry.id},
                      clock_);
    }

    void handle_berth_departure(std::int64_t lorry_id, std::int32_t slot) {
        if (!berth_state_.depart(lorry_id)) return;  // removed by a true positive
        berth_slot_of_.erase(lorry_id);
        deliver(slot, berth_target_, -1);
    }

    void handle_squad_check(std::int32_t squad_index) {
        ++rc_.berth_ticks;
        const SquadSpec& squad = sc_.berth.squads[squad_index];

        const auto lorry_of = [this](std::int64_t id) -> Lorry& {
            return pool_[berth_slot_of_.at(id)];
        };
        const auto profile_of = [this, squad_index](const Lorry& lorry,
                                                    const std::string&) {
            const int side = lorry.side == Side::Soft ? 0 : 1;
            return squad_profiles_[squad_index][side][lorry.commodity];
        };

        const auto result = squad_check(berth_state_, squad, lorry_of, profile_of,
                                        berth_rng_, graph_.nodes[berth_index_].id,
                                        clock_.now);
        if (result) {
            ++rc_.berth_checks;
            if (result->outcome == ScreeningOutcome::TruePositive) {
                const std::int32_t slot = berth_slot_of_.at(result->lorry_id);
                count_detection(graph_.nodes[berth_index_].id, result->sensor,
                                pool_[slot]);
                berth_slot_of_.erase(result->lorry_id);
                deliver(slot, berth_target_, -1);
            } else if (result->outcome == ScreeningOutcome::FalsePositive) {
                ++rc_.false_positives;
            }
        }

        if (!system_drained()) {
            const double interval = squad.check_interval.sample(berth_rng_);
            cal_.schedule({clock_.now + interval, 0, EventKind::SquadCheck, berth_index_,
                           squad_index, -1},
                          clock_);
        }
    }

    // --- exits and sampling ------------------------------------------------

    void exit_system(std::int32_t slot) {
        Lorry& lorry = pool_[slot];
        lorry.exited_at = clock_.now;
        ++rc_.exits;
        if (lorry.clandestine_aboard) ++rc_.missed;
        free_lorry(slot);
    }

    bool system_drained() const {
        return source_done_ && rc_.arrivals == rc_.exits + rc_.balked;
    }

    void handle_stat_sample() {
        WindowSample w;
        w.t_end = clock_.now;
        w.detected = rc_.detected - window_prev_detected_;
        w.missed = rc_.missed - window_prev_missed_;
        window_prev_detected_ = rc_.detected;
        window_prev_missed_ = rc_.missed;
        w.shed_mean_queue.resize(sheds_.size());
        for (std::size_t s = 0; s < sheds_.size(); ++s) {
            advance_stats(sheds_[s]);
            w.shed_mean_queue[s] =
                (sheds_[s].area_queue - window_prev_area_[s]) / sc_.run.obs_window_min;
            window_prev_area_[s] = sheds_[s].area_queue;
        }
        rc_.windows.push_back(std::move(w));

        next_window_ = clock_.now + sc_.run.obs_window_min;
        if (next_window_ <= horizon_ && !system_drained()) {
            cal_.schedule({next_window_, 0, EventKind::StatSample, -1, -1, -1}, clock_);
        }
    }

    // --- run loop ----------------------------------------------------------

    void finalize() {
        clock_.now = horizon_;
        for (ShedState& st : sheds_) advance_stats(st);
        rc_.end_time = horizon_;

        rc_.in_flight_at_end = rc_.arrivals - rc_.exits - rc_.balked;
        rc_.clandestine_in_flight =
            rc_.clandestine_arrivals - rc_.detected - rc_.missed;

        std::int64_t alive = 0, clandestine_alive = 0;
        for (std::size_t i = 0; i < pool_.size(); ++i) {
            if (in_use_[i]) {
                ++alive;
                if (pool_[i].clandestine_aboard) ++clandestine_alive;
            }
        }
        if (alive != rc_.in_flight_at_end || clandestine_alive != rc_.clandestine_in_flight) {
            throw ModelError("conservation violated: in-flight accounting disagrees");
        }

        const double t = horizon_ > 0 ? horizon_ : 1.0;
        for (std::size_t s = 0; s < sheds_.size(); ++s) {
            const ShedState& st = sheds_[s];
            const Node& node = graph_.nodes[st.node_index];
            ShedReport rep;
            rep.node = node.id;
            rep.name = node.name;
            rep.sensor = node.shed.sensor;
            rep.mean_queue = st.area_queue / t;
            rep.mean_system = st.area_system / t;
            rep.utilization = st.area_busy / (node.shed.servers * t);
            rep.admitted = st.admitted;
            rep.completed = st.completed;
            rep.balked = st.balked;
            rc_.sheds.push_back(std::move(rep));
        }
    }

};

RunCounters Engine::run() {
    schedule_next_arrival();
    if (berth_index_ >= 0) {
        for (std::size_t q = 0; q < sc_.berth.squads.size(); ++q) {
            const double interval =
                sc_.berth.squads[q].check_interval.sample(berth_rng_);
            cal_.schedule({interval, 0, EventKind::SquadCheck, berth_index_,
                           static_cast<std::int32_t>(q), -1},
                          clock_);
        }
    }
    if (sc_.run.obs_window_min <= horizon_) {
        cal_.schedule({sc_.run.obs_window_min, 0, EventKind::StatSample, -1, -1, -1},
                      clock_);
    }

    while (!cal_.empty() && cal_.next_fire_time() <= horizon_) {
        const auto ev = cal_.pop_next(clock_);
        ++rc_.events_processed;
        switch (ev->kind) {
            case EventKind::Arrival:
                handle_arrival();
                break;
            case EventKind::ServiceEnd:
                handle_service_end(ev->node, ev->aux);
                break;
            case EventKind::SquadCheck:
                handle_squad_check(ev->aux);
                break;
            case EventKind::BerthDeparture:
                handle_berth_departure(ev->lorry_id, ev->aux);
                break;
            case EventKind::StatSample:
                handle_stat_sample();
                break;
            case EventKind::ServiceStart:
                break;  // admissions happen inline; kept for completeness
        }
    }
    finalize();
    return std::move(rc_);
}

}  // namespace

RunCounters simulate_horizon(const Scenario& scenario, std::uint64_t master_seed,
                             std::uint64_t replication, double horizon_min) {
    Engine engine(scenario, master_seed, replication, horizon_min);
    return engine.run();
}

RunCounters simulate(const Scenario& scenario, std::uint64_t master_seed,
                     std::uint64_t replication) {
    return simulate_horizon(scenario, master_seed, replication,
                            scenario.run.horizon_min);
}

}  // namespace portsim
