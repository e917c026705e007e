#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace portsim {

enum class Side : std::uint8_t { Soft, Hard };

inline const char* to_string(Side s) { return s == Side::Soft ? "soft" : "hard"; }

enum class ScreeningOutcome : std::uint8_t {
    TruePositive,   // threat present, flagged
    FalseNegative,  // threat present, not flagged
    FalsePositive,  // no threat, flagged
    TrueNegative,   // no threat, not flagged
};

const char* to_string(ScreeningOutcome o);

struct CheckRecord {
    std::int32_t node = -1;
    std::string sensor;
    ScreeningOutcome outcome = ScreeningOutcome::TrueNegative;
    double time = 0.0;
};

// The flowing entity. Clandestines are a boolean load on the lorry; a true
// positive removes them (detected) while the lorry itself keeps moving.
struct Lorry {
    std::int64_t id = -1;
    Side side = Side::Soft;
    std::int32_t commodity = 0;  // index into the scenario's commodity labels
    bool clandestine_aboard = false;
    bool flagged = false;  // currently routed as suspicious
    std::vector<CheckRecord> checks;
    double created_at = 0.0;
    double exited_at = -1.0;  // < 0 while still in the system
};

}  // namespace portsim
