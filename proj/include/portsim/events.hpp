#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "portsim/errors.hpp"

namespace portsim {

// Simulated time is real-valued minutes. One simulated year = 525,600 min.
inline constexpr double kMinutesPerHour = 60.0;
inline constexpr double kMinutesPerDay = 1440.0;
inline constexpr double kMinutesPerYear = 525600.0;

struct SimClock {
    double now = 0.0;  // minutes; non-decreasing across a run
};

enum class EventKind : std::uint8_t {
    Arrival,
    ServiceStart,
    ServiceEnd,
    SquadCheck,
    BerthDeparture,
    StatSample,
};

struct TimedEvent {
    double fire_time = 0.0;
    std::uint64_t seq = 0;  // assigned by the calendar at insertion
    EventKind kind = EventKind::Arrival;
    std::int32_t node = -1;      // node the event belongs to, if any
    std::int32_t aux = -1;       // kind-specific (shed slot, squad index, ...)
    std::int64_t lorry_id = -1;  // entity the event refers to, if any
};

// Future event list ordered by (fire_time, seq). The sequence counter makes
// the order a strict total order, so simultaneous events always process in
// insertion order.
class EventCalendar {
public:
    void schedule(TimedEvent ev, const SimClock& clock) {
        if (ev.fire_time < clock.now) {
            throw ModelError("event scheduled in the past: t=" +
                             std::to_string(ev.fire_time) + " < now=" +
                             std::to_string(clock.now));
        }
        ev.seq = next_seq_++;
        heap_.push(ev);
    }

    // Pops the earliest pending event and advances the clock to it.
    // An empty calendar is the end-of-run signal, not an error.
    std::optional<TimedEvent> pop_next(SimClock& clock) {
        if (heap_.empty()) return std::nullopt;
        TimedEvent ev = heap_.top();
        heap_.pop();
        clock.now = ev.fire_time;
        return ev;
    }

    std::size_t size() const { return heap_.size(); }
    bool empty() const { return heap_.empty(); }

    double next_fire_time() const {
        return heap_.empty() ? -1.0 : heap_.top().fire_time;
    }

private:
    struct Later {
        bool operator()(const TimedEvent& a, const TimedEvent& b) const {
            if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<TimedEvent, std::vector<TimedEvent>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace portsim
