#include "portsim/berth.hpp"

#include <algorithm>

#include "portsim/errors.hpp"
#include "portsim/network.hpp"

namespace portsim {

const char* to_string(BerthMode m) {
    return m == BerthMode::CheckOnce ? "check_once" : "recheck";
}

std::vector<ValidationIssue> validate_berth(const BerthSpec& spec) {
    std::vector<ValidationIssue> issues;
    if (const auto err = spec.dwell_time.validity_error())
        issues.push_back({-1, "berth-dwell-time", *err});
    int i = 0;
    for (const SquadSpec& squad : spec.squads) {
        if (const auto err = squad.check_interval.validity_error())
            issues.push_back({-1, "berth-squad-interval",
                              "squad " + std::to_string(i) + ": " + *err});
        else if (squad.check_interval.mean() <= 0)
            issues.push_back({-1, "berth-squad-interval",
                              "squad " + std::to_string(i) + ": interval must be > 0"});
        if (squad.soft_sensor.empty() || squad.hard_action.empty())
            issues.push_back({-1, "berth-squad-sensor",
                              "squad " + std::to_string(i) + ": sensors must be named"});
        ++i;
    }
    return issues;
}

void BerthState::arrive(std::int64_t lorry_id, double now) {
    if (is_parked(lorry_id)) {
        throw ModelError("lorry " + std::to_string(lorry_id) + " is already parked at the Berth");
    }
    entries_.push_back({lorry_id, now, false});
}

bool BerthState::depart(std::int64_t lorry_id) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].lorry_id == lorry_id) {
            entries_[i] = entries_.back();
            entries_.pop_back();
            return true;
        }
    }
    return false;
}

bool BerthState::is_parked(std::int64_t lorry_id) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.lorry_id == lorry_id; });
}

std::size_t BerthState::eligible_count() const {
    if (mode_ == BerthMode::Recheck) return entries_.size();
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(),
                      [](const Entry& e) { return !e.checked; }));
}

std::optional<std::int64_t> BerthState::pick_for_check(RandomStream& rng) {
    const std::size_t eligible = eligible_count();
    if (eligible == 0) return std::nullopt;
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(eligible));
    for (Entry& e : entries_) {
        if (mode_ == BerthMode::CheckOnce && e.checked) continue;
        if (k-- == 0) {
            if (mode_ == BerthMode::CheckOnce) e.checked = true;
            return e.lorry_id;
        }
    }
    return std::nullopt;  // unreachable
}

std::optional<SquadCheckResult> squad_check(
    BerthState& state, const SquadSpec& squad,
    const std::function<Lorry&(std::int64_t)>& lorry_of,
    const std::function<DetectionProfile(const Lorry&, const std::string&)>& profile_of,
    RandomStream& rng, std::int32_t berth_node, double now) {
    const auto picked = state.pick_for_check(rng);
    if (!picked) return std::nullopt;

    Lorry& lorry = lorry_of(*picked);
    const std::string& sensor =
        lorry.side == Side::Soft ? squad.soft_sensor : squad.hard_action;
    const DetectionProfile profile = profile_of(lorry, sensor);
    const ScreeningOutcome outcome =
        resolve_screening(lorry, profile, rng, berth_node, sensor, now);

    SquadCheckResult result{*picked, outcome, sensor, false};
    if (outcome == ScreeningOutcome::TruePositive) {
        state.depart(*picked);
        result.removed_from_parked = true;
    }
    return result;
}

}  // namespace portsim
