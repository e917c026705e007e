#include "portsim/drm.hpp"

#include <algorithm>

namespace portsim {

namespace {
const std::string kEmpty;

const std::string& value_or_empty(const std::optional<std::string>& s) {
    return s ? *s : kEmpty;
}
}  // namespace

const char* to_string(DrmLevel level) {
    switch (level) {
        case DrmLevel::Default: return "default";
        case DrmLevel::Level1: return "level1";
        case DrmLevel::Level2: return "level2";
        case DrmLevel::Level3: return "level3";
    }
    return "?";
}

bool Drm::add_entry(DrmLevel level, const DrmKey& key, DetectionProfile profile) {
    switch (level) {
        case DrmLevel::Level3:
            return level3_
                .emplace(Key3{value_or_empty(key.containment), value_or_empty(key.commodity),
                              key.threat, key.sensor},
                         profile)
                .second;
        case DrmLevel::Level2:
            return level2_
                .emplace(Key2{value_or_empty(key.commodity), key.threat, key.sensor}, profile)
                .second;
        case DrmLevel::Level1:
            return level1_
                .emplace(Key1{value_or_empty(key.commodity), key.threat,
                              value_or_empty(key.scenario)},
                         profile)
                .second;
        case DrmLevel::Default:
            default_ = profile;
            return true;
    }
    return false;
}

DrmMatch Drm::lookup(const DrmKey& key) const {
    if (key.containment && key.commodity) {
        const auto it = level3_.find(Key3{*key.containment, *key.commodity, key.threat, key.sensor});
        if (it != level3_.end()) return {it->second, DrmLevel::Level3};
    }
    if (key.commodity) {
        const auto it = level2_.find(Key2{*key.commodity, key.threat, key.sensor});
        if (it != level2_.end()) return {it->second, DrmLevel::Level2};
    }
    if (key.commodity && key.scenario) {
        const auto it = level1_.find(Key1{*key.commodity, key.threat, *key.scenario});
        if (it != level1_.end()) return {it->second, DrmLevel::Level1};
    }
    return {default_, DrmLevel::Default};
}

std::vector<DrmKey> Drm::gaps(const std::vector<DrmKey>& universe) const {
    std::vector<DrmKey> out;
    for (const DrmKey& key : universe) {
        if (lookup(key).level == DrmLevel::Default) out.push_back(key);
    }
    return out;
}

void Drm::override_all_tp(double p) {
    for (auto& [k, v] : level3_) v.tp_rate = p;
    for (auto& [k, v] : level2_) v.tp_rate = p;
    for (auto& [k, v] : level1_) v.tp_rate = p;
    default_.tp_rate = p;
}

void Drm::override_all_fp(double p) {
    for (auto& [k, v] : level3_) v.fp_rate = p;
    for (auto& [k, v] : level2_) v.fp_rate = p;
    for (auto& [k, v] : level1_) v.fp_rate = p;
    default_.fp_rate = p;
}

double effective_tp(const DetectionProfile& base, int queue_len, const LoadModifier& m) {
    const double excess = std::max(0, queue_len - m.q0);
    const double degraded = base.tp_rate * (1.0 - m.alpha * excess);
    return std::min(base.tp_rate, std::max(m.floor, degraded));
}

ScreeningOutcome resolve_screening(Lorry& lorry, const DetectionProfile& profile,
                                   RandomStream& rng, std::int32_t node,
                                   const std::string& sensor, double now) {
    ScreeningOutcome outcome;
    if (lorry.clandestine_aboard) {
        outcome = rng.bernoulli(profile.tp_rate) ? ScreeningOutcome::TruePositive
                                                 : ScreeningOutcome::FalseNegative;
    } else {
        outcome = rng.bernoulli(profile.fp_rate) ? ScreeningOutcome::FalsePositive
                                                 : ScreeningOutcome::TrueNegative;
    }
    const bool positive = outcome == ScreeningOutcome::TruePositive ||
                          outcome == ScreeningOutcome::FalsePositive;
    lorry.flagged = positive;
    lorry.checks.push_back({node, sensor, outcome, now});
    return outcome;
}

const char* to_string(ScreeningOutcome o) {
    switch (o) {
        case ScreeningOutcome::TruePositive: return "true_positive";
        case ScreeningOutcome::FalseNegative: return "false_negative";
        case ScreeningOutcome::FalsePositive: return "false_positive";
        case ScreeningOutcome::TrueNegative: return "true_negative";
    }
    return "?";
}

}  // namespace portsim
