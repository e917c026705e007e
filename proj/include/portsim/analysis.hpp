#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "portsim/engine.hpp"
#include "portsim/scenario.hpp"

namespace portsim {

// Replication statistics: mean, sample sd and the t-based confidence-interval
// half-width t(1-(1-conf)/2, n-1) * sd / sqrt(n).
struct Summary {
    int n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double ci_half_width = 0.0;
    bool ci_available = false;
};

Summary summarize(const std::vector<double>& values, double confidence = 0.95);

// MSER warm-up truncation on batch means.
struct MserResult {
    int truncation_batches = 0;  // d*: batches to discard
    int truncation_obs = 0;      // d* in raw observations
    int batch_count = 0;
    bool capped = false;  // d* hit the half-series cap
};

// MSER-k rule (k = batch, default MSER-5): batch means of size `batch`,
// truncation index minimizing the marginal standard error of the remaining
// batch means, capped at half the batches. Throws std::invalid_argument when
// the series is shorter than two batches.
MserResult mser_warmup(const std::vector<double>& series, int batch = 5);

// Per-replication counters of one scenario, all from the same master seed.
struct ReplicationSet {
    std::vector<RunCounters> replications;
    std::uint64_t master_seed = 0;
    std::string scenario_hash;
};

// n independent replications, streams keyed by replication index, so
// replication i is identical whether run alone or inside any batch.
// `threads` > 1 distributes replications over worker threads; results are
// ordered by index either way.
ReplicationSet run_replications(const Scenario& scenario, int n,
                                std::uint64_t master_seed, int threads = 1);
ReplicationSet run_replications_horizon(const Scenario& scenario, int n,
                                        std::uint64_t master_seed, double horizon_min,
                                        int threads = 1);

// The fixed metric layout of the CSV export, derived from the scenario so
// every replication emits the same rows.
std::vector<std::string> metric_names(const Scenario& scenario);
double metric_value(const RunCounters& rc, const Scenario& scenario,
                    const std::string& name);

// Cross-replication per-window detection-fraction series (pooled counts per
// window), used for warm-up analysis. Windows with no completed clandestine
// passage are skipped.
std::vector<double> pooled_detection_series(const ReplicationSet& set);

// Data rows (scenario_hash, master_seed, replication, metric, value) followed
// by a summary block (metric, n, mean, sd, ci95_half_width, warmup_index).
// Values print with 10 significant digits.
void export_csv(const ReplicationSet& set, const Scenario& scenario, std::ostream& out);
void export_csv_file(const ReplicationSet& set, const Scenario& scenario,
                     const std::string& path);

// 10-significant-digit decimal formatting used across all CSV output.
std::string format_value(double v);

}  // namespace portsim
