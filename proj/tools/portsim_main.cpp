#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "portsim/analysis.hpp"
#include "portsim/engine.hpp"
#include "portsim/errors.hpp"
#include "portsim/experiment.hpp"
#include "portsim/oracle.hpp"
#include "portsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitOracle = 4;

struct CommonOpts {
    std::string scenario_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> reps_flag;
    std::optional<double> horizon_flag;
    std::string out_path;
    int threads = 1;
    bool force_recheck = false;
    bool force_check_once = false;
};

// Seed precedence: flag > PORTSIM_SEED > scenario run.seed > 1.
std::uint64_t resolve_seed(const CommonOpts& opts, const portsim::Scenario& sc) {
    if (opts.seed_flag) return *opts.seed_flag;
    if (const char* env = std::getenv("PORTSIM_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return v;
        std::cerr << "warning: ignoring non-numeric PORTSIM_SEED\n";
    }
    return sc.run.seed;
}

int load_and_validate(const CommonOpts& opts, portsim::Scenario& sc) {
    try {
        sc = portsim::load_scenario(opts.scenario_path);
    } catch (const portsim::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    }
    if (opts.force_recheck) sc.berth.mode = portsim::BerthMode::Recheck;
    if (opts.force_check_once) sc.berth.mode = portsim::BerthMode::CheckOnce;
    const auto issues = portsim::validate_scenario(sc);
    if (!issues.empty()) {
        for (const auto& i : issues) {
            std::cerr << "validation: ";
            if (i.node >= 0) std::cerr << "node " << i.node << ": ";
            std::cerr << "[" << i.rule << "] " << i.message << "\n";
        }
        return kExitValidation;
    }
    return kExitOk;
}

int cmd_validate(const CommonOpts& opts, bool show_gaps) {
    portsim::Scenario sc;
    const int rc = load_and_validate(opts, sc);
    if (rc != kExitOk) return rc;
    std::cout << "scenario '" << sc.name << "' is valid (hash " << sc.hash_hex << ")\n";
    std::cout << "  nodes: " << sc.graph.nodes.size() << ", edges: " << sc.graph.edges.size()
              << ", drm entries: " << sc.drm.entry_count() << "\n";
    const auto universe = portsim::drm_universe(sc);
    const auto gaps = sc.drm.gaps(universe);
    std::cout << "  drm coverage: " << universe.size() - gaps.size() << "/"
              << universe.size() << " keys resolve above the default profile\n";
    if (show_gaps) {
        for (const auto& key : gaps) {
            std::cout << "  gap: containment=" << key.containment.value_or("-")
                      << " commodity=" << key.commodity.value_or("-")
                      << " threat=" << key.threat << " sensor=" << key.sensor << "\n";
        }
    }
    return kExitOk;
}

int cmd_run(const CommonOpts& opts) {
    portsim::Scenario sc;
    const int rc = load_and_validate(opts, sc);
    if (rc != kExitOk) return rc;
    const std::uint64_t seed = resolve_seed(opts, sc);
    const int reps = opts.reps_flag.value_or(sc.run.replications);
    const double horizon = opts.horizon_flag.value_or(sc.run.horizon_min);

    const portsim::ReplicationSet set =
        portsim::run_replications_horizon(sc, reps, seed, horizon, opts.threads);

    if (!opts.out_path.empty()) portsim::export_csv_file(set, sc, opts.out_path);

    std::printf("scenario %s  seed %llu  reps %d  horizon %.0f min\n", sc.name.c_str(),
                static_cast<unsigned long long>(seed), reps, horizon);
    std::printf("%-24s %12s %12s %12s\n", "metric", "mean", "sd", "ci95_hw");
    for (const std::string& name : portsim::metric_names(sc)) {
        std::vector<double> values;
        values.reserve(set.replications.size());
        for (const auto& r : set.replications)
            values.push_back(portsim::metric_value(r, sc, name));
        const portsim::Summary s = portsim::summarize(values, sc.run.confidence);
        std::printf("%-24s %12s %12s %12s\n", name.c_str(),
                    portsim::format_value(s.mean).c_str(),
                    portsim::format_value(s.sd).c_str(),
                    portsim::format_value(s.ci_half_width).c_str());
    }
    return kExitOk;
}

int cmd_sweep(const CommonOpts& opts, portsim::SweepSpec spec) {
    portsim::Scenario sc;
    const int rc = load_and_validate(opts, sc);
    if (rc != kExitOk) return rc;
    const std::uint64_t seed = resolve_seed(opts, sc);
    if (opts.reps_flag) spec.replications = *opts.reps_flag;
    spec.horizon_min = opts.horizon_flag.value_or(sc.run.horizon_min);

    std::vector<portsim::SweepRow> rows;
    try {
        rows = portsim::run_sweep(sc, spec, seed, opts.threads);
    } catch (const portsim::OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return kExitOracle;
    }

    if (!opts.out_path.empty()) {
        std::ofstream out(opts.out_path);
        if (!out) {
            std::cerr << "cannot write " << opts.out_path << "\n";
            return kExitRuntime;
        }
        portsim::write_sweep_csv(out, rows);
    }
    std::printf("%8s %12s %12s %12s %6s\n", "p", "mean", "ci95", "oracle_d", "n");
    for (const portsim::SweepRow& r : rows) {
        std::printf("%8s %12s %12s %12s %6d\n", portsim::format_value(r.p).c_str(),
                    portsim::format_value(r.mean).c_str(),
                    portsim::format_value(r.ci95).c_str(),
                    portsim::format_value(r.oracle_d).c_str(), r.n);
    }
    return kExitOk;
}

int cmd_oracle(const CommonOpts& opts, const portsim::SweepSpec& grid_spec) {
    portsim::Scenario sc;
    const int rc = load_and_validate(opts, sc);
    if (rc != kExitOk) return rc;
    try {
        const auto classes = portsim::reduce_scenario(sc);
        const auto grid = portsim::sweep_grid(grid_spec);
        const auto verdict = portsim::mixed_concavity(classes, grid);

        std::printf("%8s %12s\n", "p", "D(p)");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::printf("%8s %12s\n", portsim::format_value(grid[i]).c_str(),
                        portsim::format_value(verdict.values[i]).c_str());
        }
        std::printf("base-rate D = %s\n",
                    portsim::format_value(portsim::mixed_detection(classes)).c_str());
        std::printf("monotone: %s\n", verdict.monotone ? "yes" : "no");
        std::printf("concave: %s\n", verdict.concave ? "yes" : "no");
        std::printf("min stages on any path: %d\n", verdict.min_stages);
        if (verdict.above_diagonal_applicable) {
            std::printf("above diagonal (interior p): %s\n",
                        verdict.above_diagonal ? "yes" : "no");
        }
    } catch (const portsim::OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return kExitOracle;
    }
    return kExitOk;
}

int cmd_warmup(const CommonOpts& opts, int batch, int ma_window) {
    portsim::Scenario sc;
    const int rc = load_and_validate(opts, sc);
    if (rc != kExitOk) return rc;
    const std::uint64_t seed = resolve_seed(opts, sc);
    const int reps = opts.reps_flag.value_or(sc.run.replications);
    const double horizon = opts.horizon_flag.value_or(sc.run.horizon_min);

    const portsim::ReplicationSet set =
        portsim::run_replications_horizon(sc, reps, seed, horizon, opts.threads);
    const std::vector<double> series = portsim::pooled_detection_series(set);
    if (static_cast<int>(series.size()) < 2 * batch) {
        std::cerr << "series too short for MSER-" << batch << " (" << series.size()
                  << " windows); lengthen the horizon or shrink the window\n";
        return kExitRuntime;
    }
    const portsim::MserResult m = portsim::mser_warmup(series, batch);
    std::printf("windows: %zu  batch: %d  mser_truncation: %d batches (%d windows)%s\n",
                series.size(), batch, m.truncation_batches, m.truncation_obs,
                m.capped ? "  [capped at half the series]" : "");

    if (!opts.out_path.empty()) {
        std::ofstream out(opts.out_path);
        if (!out) {
            std::cerr << "cannot write " << opts.out_path << "\n";
            return kExitRuntime;
        }
        out << "window,detection_fraction,welch_ma\n";
        for (std::size_t i = 0; i < series.size(); ++i) {
            // Centered Welch-style moving average for plotting.
            const int half = ma_window / 2;
            double sum = 0.0;
            int n = 0;
            for (int k = -half; k <= half; ++k) {
                const std::int64_t j = static_cast<std::int64_t>(i) + k;
                if (j >= 0 && j < static_cast<std::int64_t>(series.size())) {
                    sum += series[j];
                    ++n;
                }
            }
            out << i << ',' << portsim::format_value(series[i]) << ','
                << portsim::format_value(sum / n) << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"portsim: multi-stage cargo-screening pipeline simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    portsim::SweepSpec sweep_spec;
    bool show_gaps = false;
    int batch = 5;
    int ma_window = 5;

    const auto add_common = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file")
            ->required();
        cmd->add_option("--seed", opts.seed_flag, "master seed (overrides PORTSIM_SEED)");
        cmd->add_option("--reps", opts.reps_flag, "replication count");
        cmd->add_option("--horizon", opts.horizon_flag, "simulated horizon in minutes");
        cmd->add_option("--threads", opts.threads, "worker threads for replications");
        cmd->add_flag("--recheck", opts.force_recheck, "Berth: recheck mode");
        cmd->add_flag("--check-once", opts.force_check_once, "Berth: check-once mode");
        if (with_out) cmd->add_option("--out", opts.out_path, "output CSV path");
    };

    CLI::App* validate = app.add_subcommand("validate", "load and validate a scenario");
    add_common(validate, false);
    validate->add_flag("--show-gaps", show_gaps, "list DRM keys resolving to the default");

    CLI::App* run = app.add_subcommand("run", "run replications, print and export stats");
    add_common(run, true);

    CLI::App* sweep = app.add_subcommand(
        "sweep", "sweep a common sensor detection rate over a grid");
    add_common(sweep, true);
    sweep->add_option("--p-start", sweep_spec.p_start, "grid start (default 0)");
    sweep->add_option("--p-end", sweep_spec.p_end, "grid end (default 1)");
    sweep->add_option("--p-step", sweep_spec.p_step, "grid step (default 0.1)");
    sweep->add_flag("--sweep-fp", sweep_spec.sweep_fp,
                    "override false-positive rates as well (default: tp only)");

    CLI::App* oracle = app.add_subcommand(
        "oracle", "print the analytic D(p) table of the acyclic reduction");
    add_common(oracle, false);
    oracle->add_option("--p-start", sweep_spec.p_start, "grid start (default 0)");
    oracle->add_option("--p-end", sweep_spec.p_end, "grid end (default 1)");
    oracle->add_option("--p-step", sweep_spec.p_step, "grid step (default 0.1)");

    CLI::App* warmup = app.add_subcommand(
        "warmup", "MSER warm-up analysis of the windowed detection series");
    add_common(warmup, true);
    warmup->add_option("--batch", batch, "MSER batch size (default 5)");
    warmup->add_option("--ma-window", ma_window, "Welch moving-average window");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(opts, show_gaps);
        if (run->parsed()) return cmd_run(opts);
        if (sweep->parsed()) return cmd_sweep(opts, sweep_spec);
        if (oracle->parsed()) return cmd_oracle(opts, sweep_spec);
        if (warmup->parsed()) return cmd_warmup(opts, batch, ma_window);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
