#include "portsim/experiment.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "portsim/oracle.hpp"

namespace portsim {

std::vector<double> sweep_grid(const SweepSpec& spec) {
    if (spec.p_start < 0.0 || spec.p_end > 1.0 || spec.p_start > spec.p_end)
        throw std::invalid_argument("sweep grid must satisfy 0 <= p_start <= p_end <= 1");
    if (spec.p_step <= 0.0) throw std::invalid_argument("sweep p_step must be > 0");
    if (spec.replications < 1)
        throw std::invalid_argument("sweep needs at least one replication");
    const int count =
        static_cast<int>(std::floor((spec.p_end - spec.p_start) / spec.p_step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (int i = 0; i < count; ++i) {
        // Snap away accumulated floating-point drift so grid points print clean.
        const double p = spec.p_start + i * spec.p_step;
        grid.push_back(std::round(p * 1e9) / 1e9);
    }
    return grid;
}

std::vector<SweepRow> run_sweep(const Scenario& scenario, const SweepSpec& spec,
                                std::uint64_t master_seed, int threads) {
    const std::vector<double> grid = sweep_grid(spec);
    const std::vector<ClassNet> classes = reduce_scenario(scenario);

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const double p : grid) {
        Scenario variant = scenario;
        variant.drm.override_all_tp(p);
        if (spec.sweep_fp) variant.drm.override_all_fp(p);

        const ReplicationSet set = run_replications_horizon(
            variant, spec.replications, master_seed, spec.horizon_min, threads);
        std::vector<double> fractions;
        fractions.reserve(set.replications.size());
        for (const RunCounters& rc : set.replications) {
            const auto f = detection_fraction(rc);
            fractions.push_back(f ? *f : std::numeric_limits<double>::quiet_NaN());
        }
        const Summary s = summarize(fractions, scenario.run.confidence);

        SweepRow row;
        row.p = p;
        row.mean = s.mean;
        row.ci95 = s.ci_half_width;
        row.oracle_d = mixed_detection(classes, p);
        row.n = s.n;
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "p,mean,ci95,oracle_d\n";
    for (const SweepRow& r : rows) {
        out << format_value(r.p) << ',' << format_value(r.mean) << ','
            << format_value(r.ci95) << ',' << format_value(r.oracle_d) << '\n';
    }
}

}  // namespace portsim
