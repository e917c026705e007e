#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "portsim/distributions.hpp"
#include "portsim/drm.hpp"
#include "portsim/lorry.hpp"
#include "portsim/network.hpp"

namespace portsim {

// CheckOnce: checked lorries go on an ignore list and are never picked again.
// Recheck: every parked lorry stays eligible for repeated checks.
enum class BerthMode : std::uint8_t { CheckOnce, Recheck };

const char* to_string(BerthMode m);

// A mobile squad: recurring check events whose inter-arrival time is the time
// one check takes. Soft-sided lorries get the mobile sensor, hard-sided ones
// are opened.
struct SquadSpec {
    DistributionSpec check_interval;
    std::string soft_sensor = "CO2-mobile";
    std::string hard_action = "Visual";
};

struct BerthSpec {
    BerthMode mode = BerthMode::CheckOnce;
    DistributionSpec dwell_time;  // per-lorry wait before ferry departure
    std::vector<SquadSpec> squads;
};

std::vector<ValidationIssue> validate_berth(const BerthSpec& spec);

// Lorries parked before ferry boarding. Moving sensors, fixed targets: squads
// pick uniformly at random among eligible parked lorries.
class BerthState {
public:
    explicit BerthState(BerthMode mode = BerthMode::CheckOnce) : mode_(mode) {}

    struct Entry {
        std::int64_t lorry_id;
        double parked_at;
        bool checked;  // ignore-list membership (CheckOnce only)
    };

    // ModelError on duplicate arrival.
    void arrive(std::int64_t lorry_id, double now);

    // Removes the lorry; false when it was not parked (a stale departure
    // event after a true-positive removal).
    bool depart(std::int64_t lorry_id);

    bool is_parked(std::int64_t lorry_id) const;

    std::size_t parked_count() const { return entries_.size(); }
    std::size_t eligible_count() const;
    BerthMode mode() const { return mode_; }
    const std::vector<Entry>& entries() const { return entries_; }

    // Uniform pick among eligible entries; no stream draw when none are
    // eligible. Marks the pick as checked in CheckOnce mode.
    std::optional<std::int64_t> pick_for_check(RandomStream& rng);

private:
    friend struct BerthOps;
    BerthMode mode_;
    std::vector<Entry> entries_;
};

struct SquadCheckResult {
    std::int64_t lorry_id;
    ScreeningOutcome outcome;
    std::string sensor;
    bool removed_from_parked;  // true positives leave the parked set
};

// One squad tick: pick an eligible lorry (no-op when there is none — the
// squad idles), screen it with the side-appropriate sensor, and on a true
// positive remove it from the parked set. The caller counts detections and
// routes removed lorries onward.
std::optional<SquadCheckResult> squad_check(
    BerthState& state, const SquadSpec& squad,
    const std::function<Lorry&(std::int64_t)>& lorry_of,
    const std::function<DetectionProfile(const Lorry&, const std::string&)>& profile_of,
    RandomStream& rng, std::int32_t berth_node, double now);

}  // namespace portsim
