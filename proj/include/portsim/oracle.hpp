#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "portsim/scenario.hpp"

namespace portsim {

// The scenario cannot be reduced to an exact analytic form (cycle, or
// shortest-queue candidates that are not detection-equivalent).
class OracleError : public std::runtime_error {
public:
    explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

// Acyclic screening net: stages with a true-positive rate, probabilistic
// splits, and terminals. No Berth, no load modifiers — those are excluded so
// the closed form stays exact.
struct AnalyticNode {
    enum class Kind : std::uint8_t { Stage, Split, Terminal };
    Kind kind = Kind::Terminal;
    std::string label;
    double tp = 0.0;       // Stage
    int next = -1;         // Stage: continuation after a negative outcome
    int on_positive = -1;  // Stage: continuation after a positive; -1: same as next
    std::vector<std::pair<double, int>> branches;  // Split
};

struct AnalyticNet {
    std::vector<AnalyticNode> nodes;
    int root = -1;

    AnalyticNet with_tp(double p) const;  // every stage tp replaced by p

    // Convenience builders for hand-made validation nets.
    int add_stage(const std::string& label, double tp, int next, int on_positive = -1);
    int add_split(const std::vector<std::pair<double, int>>& branches);
    int add_terminal();
};

// Exact P(detect | threat aboard) by exhaustive root-to-sink path enumeration:
// sum over paths of P(path) * (1 - prod over stages of (1 - tp)). Throws
// OracleError on cycles or when the path count exceeds the cap.
double analytic_detection(const AnalyticNet& net, std::int64_t max_paths = 1000000);

// Independent second route: full outcome-tree expansion, propagating
// probability mass through per-stage positive/negative branches (positives
// divert along on_positive) and reading the detected mass off the sinks.
double analytic_detection_outcome_tree(const AnalyticNet& net,
                                       std::int64_t max_leaves = 1000000);

// Minimum number of screening stages over all negative-outcome paths.
int min_stage_count(const AnalyticNet& net);

// Discrete shape of the common-p detection curve D(p).
struct CurveVerdict {
    bool monotone = false;           // non-decreasing over the grid
    bool concave = false;            // non-increasing forward differences
    bool above_diagonal = false;     // D(p) >= p at interior grid points
    bool above_diagonal_applicable = false;  // min_stages >= 2
    int min_stages = 0;
    std::vector<double> values;
};

CurveVerdict concavity_check(const AnalyticNet& net, const std::vector<double>& p_values);

// Scenario reduction: one analytic net per (side, commodity) class with its
// arrival weight. Sensorless sheds and the Berth reduce to pass-throughs.
struct ClassNet {
    double weight = 0.0;
    std::string label;
    AnalyticNet net;
};

std::vector<ClassNet> reduce_scenario(const Scenario& scenario);

// Class-weighted system detection probability; with override_p every stage
// rate is replaced by the common p (the sweep set-up).
double mixed_detection(const std::vector<ClassNet>& classes,
                       std::optional<double> override_p = std::nullopt);

CurveVerdict mixed_concavity(const std::vector<ClassNet>& classes,
                             const std::vector<double>& p_values);

}  // namespace portsim
