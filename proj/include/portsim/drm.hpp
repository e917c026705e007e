#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "portsim/lorry.hpp"
#include "portsim/rng.hpp"

namespace portsim {

// Sensor performance: probability a present threat is flagged (tp_rate,
// sensitivity) and probability an absent threat is flagged (fp_rate).
struct DetectionProfile {
    double tp_rate = 0.0;
    double fp_rate = 0.0;

    bool valid() const {
        return tp_rate >= 0.0 && tp_rate <= 1.0 && fp_rate >= 0.0 && fp_rate <= 1.0;
    }
};

// Specificity levels of the detection-rate hierarchy, most specific first:
//   3  containment + commodity + threat + sensor
//   2  commodity + threat + sensor
//   1  commodity + threat + scenario
//   0  the catch-all default profile
enum class DrmLevel : int { Default = 0, Level1 = 1, Level2 = 2, Level3 = 3 };

const char* to_string(DrmLevel level);

// Lookup key. Sensor and threat are always present; the other dimensions are
// optional and determine which levels can match. Wall thickness and density
// are carried as key attributes but not matched in v1 (exact-label matching
// only).
struct DrmKey {
    std::optional<std::string> containment;
    std::optional<double> wall_thickness_mm;
    std::optional<double> wall_density_kgm3;
    std::optional<std::string> commodity;
    std::string threat = "clandestine";
    std::string sensor;
    std::optional<std::string> scenario;
};

struct DrmMatch {
    DetectionProfile profile;
    DrmLevel level = DrmLevel::Default;
};

// The Detection Rate Matrix: one merged profile per key, most-specific match
// wins, with a default profile so every lookup resolves. Immutable once the
// scenario is loaded.
class Drm {
public:
    explicit Drm(DetectionProfile default_profile = {0.5, 0.05})
        : default_(default_profile) {}

    // Returns false when an identical key already has an entry.
    bool add_entry(DrmLevel level, const DrmKey& key, DetectionProfile profile);

    DrmMatch lookup(const DrmKey& key) const;

    const DetectionProfile& default_profile() const { return default_; }

    // Keys from the universe that resolve only to the default profile.
    std::vector<DrmKey> gaps(const std::vector<DrmKey>& universe) const;

    // Replaces every stored tp (or fp) rate, including the default. Used by
    // the sweep experiment where all sensors share one common value.
    void override_all_tp(double p);
    void override_all_fp(double p);

    std::size_t entry_count() const {
        return level3_.size() + level2_.size() + level1_.size();
    }

private:
    using Key3 = std::tuple<std::string, std::string, std::string, std::string>;
    using Key2 = std::tuple<std::string, std::string, std::string>;
    using Key1 = std::tuple<std::string, std::string, std::string>;

    std::map<Key3, DetectionProfile> level3_;  // containment, commodity, threat, sensor
    std::map<Key2, DetectionProfile> level2_;  // commodity, threat, sensor
    std::map<Key1, DetectionProfile> level1_;  // commodity, threat, scenario
    DetectionProfile default_;
};

// Queue-pressure degradation of the true-positive rate: operators rush when
// the queue is long. Inert (alpha = 0) by default so the base model matches
// the stationary experiment set-up.
struct LoadModifier {
    double alpha = 0.0;  // degradation per queued lorry beyond q0
    int q0 = 0;          // queue-length threshold
    double floor = 0.0;  // minimum effective tp

    bool valid() const { return alpha >= 0.0 && floor >= 0.0 && floor <= 1.0; }
};

// max(floor, tp * (1 - alpha * max(0, queue_len - q0))), never above base tp.
double effective_tp(const DetectionProfile& base, int queue_len, const LoadModifier& m);

// Draws the screening outcome, appends it to the lorry's check history and
// updates the suspicion flag (set on positives, cleared on negatives).
// Detection counting and clandestine removal are the caller's business.
ScreeningOutcome resolve_screening(Lorry& lorry, const DetectionProfile& profile,
                                   RandomStream& rng, std::int32_t node,
                                   const std::string& sensor, double now);

}  // namespace portsim
