#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "portsim/analysis.hpp"
#include "portsim/scenario.hpp"

namespace portsim {

// The collective-detection-rate experiment: override every DRM tp rate with a
// common p over a grid, run replications per point, compare against the
// analytic oracle of the acyclic reduction.
struct SweepSpec {
    double p_start = 0.0;
    double p_end = 1.0;
    double p_step = 0.1;
    int replications = 20;
    double horizon_min = 525600.0;
    bool sweep_fp = false;  // also override fp rates (off: tp only)
};

struct SweepRow {
    double p = 0.0;
    double mean = 0.0;     // mean detection fraction over replications
    double ci95 = 0.0;     // t-based half-width (NaN when reps == 1)
    double oracle_d = 0.0; // analytic detection of the acyclic reduction
    int n = 0;             // replications with a defined detection fraction
};

// Grid points p_start, p_start+p_step, ...; row count is
// floor((p_end - p_start)/p_step) + 1.
std::vector<double> sweep_grid(const SweepSpec& spec);

std::vector<SweepRow> run_sweep(const Scenario& scenario, const SweepSpec& spec,
                                std::uint64_t master_seed, int threads = 1);

// Plot-ready CSV: p, mean, ci95, oracle_d.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace portsim
