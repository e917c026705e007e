#include "portsim/analysis.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "portsim/errors.hpp"
#include "portsim/stats.hpp"

namespace portsim {

Summary summarize(const std::vector<double>& values, double confidence) {
    Summary s;
    std::vector<double> defined;
    defined.reserve(values.size());
    for (const double v : values) {
        if (!std::isnan(v)) defined.push_back(v);
    }
    s.n = static_cast<int>(defined.size());
    if (s.n == 0) {
        s.mean = s.sd = s.ci_half_width = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.mean = mean_of(defined);
    if (s.n == 1) {
        s.sd = s.ci_half_width = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.sd = sample_sd(defined);
    const double t = student_t_quantile(1.0 - (1.0 - confidence) / 2.0,
                                        static_cast<double>(s.n - 1));
    s.ci_half_width = t * s.sd / std::sqrt(static_cast<double>(s.n));
    s.ci_available = true;
    return s;
}

MserResult mser_warmup(const std::vector<double>& series, int batch) {
    if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
    const int m = static_cast<int>(series.size()) / batch;
    if (m < 2) throw std::invalid_argument("series too short for MSER (need >= 2 batches)");

    std::vector<double> means(m);
    for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int i = 0; i < batch; ++i) s += series[j * batch + i];
        means[j] = s / batch;
    }

    // Suffix sums allow evaluating every truncation point in one pass.
    std::vector<double> suf(m + 1, 0.0), suf2(m + 1, 0.0);
    for (int j = m - 1; j >= 0; --j) {
        suf[j] = suf[j + 1] + means[j];
        suf2[j] = suf2[j + 1] + means[j] * means[j];
    }

    const int cap = m / 2;
    int best = 0;
    double best_stat = std::numeric_limits<double>::infinity();
    for (int d = 0; d <= cap; ++d) {
        const int k = m - d;
        const double mu = suf[d] / k;
        const double ss = suf2[d] - 2.0 * mu * suf[d] + k * mu * mu;
        const double stat = ss / (static_cast<double>(k) * k);
        // Strict improvement beyond float noise; ties keep the smallest d.
        if (stat < best_stat && best_stat - stat > 1e-15 * std::max(1.0, stat)) {
            best_stat = stat;
            best = d;
        }
    }

    MserResult r;
    r.truncation_batches = best;
    r.truncation_obs = best * batch;
    r.batch_count = m;
    r.capped = best == cap && cap > 0;
    return r;
}

ReplicationSet run_replications_horizon(const Scenario& scenario, int n,
                                        std::uint64_t master_seed, double horizon_min,
                                        int threads) {
    if (n < 1) throw std::invalid_argument("replication count must be >= 1");
    ReplicationSet set;
    set.master_seed = master_seed;
    set.scenario_hash = scenario.hash_hex;
    set.replications.resize(n);

    const int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) {
            set.replications[i] = simulate_horizon(scenario, master_seed, i, horizon_min);
        }
        return set;
    }

    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                set.replications[i] = simulate_horizon(scenario, master_seed, i, horizon_min);
            }
        });
    }
    for (std::thread& t : pool) t.join();
    return set;
}

ReplicationSet run_replications(const Scenario& scenario, int n,
                                std::uint64_t master_seed, int threads) {
    return run_replications_horizon(scenario, n, master_seed, scenario.run.horizon_min,
                                    threads);
}

std::vector<std::string> metric_names(const Scenario& scenario) {
    std::vector<std::string> names = {
        "detection_fraction", "arrivals",        "clandestine_arrivals",
        "detected",           "missed",          "false_positives",
        "balked",             "exits",           "in_flight_at_end",
        "clandestine_in_flight",
    };
    for (const Node& node : scenario.graph.nodes) {
        if (node.kind != NodeKind::ServiceShed) continue;
        names.push_back("queue_mean:" + node.name);
        names.push_back("utilization:" + node.name);
        if (!node.shed.sensor.empty())
            names.push_back("detected_at:" + node.name + ":" + node.shed.sensor);
    }
    if (scenario.has_berth_node()) {
        std::vector<std::string> berth_sensors;
        for (const SquadSpec& squad : scenario.berth.squads) {
            for (const std::string& s : {squad.soft_sensor, squad.hard_action}) {
                bool seen = false;
                for (const auto& b : berth_sensors) seen = seen || b == s;
                if (!seen) berth_sensors.push_back(s);
            }
        }
        for (const Node& node : scenario.graph.nodes) {
            if (node.kind != NodeKind::Berth) continue;
            for (const std::string& s : berth_sensors)
                names.push_back("detected_at:" + node.name + ":" + s);
        }
    }
    return names;
}

double metric_value(const RunCounters& rc, const Scenario& scenario,
                    const std::string& name) {
    const auto count = [](std::int64_t v) { return static_cast<double>(v); };
    if (name == "detection_fraction") {
        const auto f = detection_fraction(rc);
        return f ? *f : std::numeric_limits<double>::quiet_NaN();
    }
    if (name == "arrivals") return count(rc.arrivals);
    if (name == "clandestine_arrivals") return count(rc.clandestine_arrivals);
    if (name == "detected") return count(rc.detected);
    if (name == "missed") return count(rc.missed);
    if (name == "false_positives") return count(rc.false_positives);
    if (name == "balked") return count(rc.balked);
    if (name == "exits") return count(rc.exits);
    if (name == "in_flight_at_end") return count(rc.in_flight_at_end);
    if (name == "clandestine_in_flight") return count(rc.clandestine_in_flight);

    if (name.rfind("queue_mean:", 0) == 0) {
        const std::string shed = name.substr(11);
        for (const ShedReport& r : rc.sheds)
            if (r.name == shed) return r.mean_queue;
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (name.rfind("utilization:", 0) == 0) {
        const std::string shed = name.substr(12);
        for (const ShedReport& r : rc.sheds)
            if (r.name == shed) return r.utilization;
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (name.rfind("detected_at:", 0) == 0) {
        const std::string rest = name.substr(12);
        const auto sep = rest.find(':');
        const std::string node_name = rest.substr(0, sep);
        const std::string sensor = rest.substr(sep + 1);
        std::int32_t node_id = -1;
        for (const Node& node : scenario.graph.nodes)
            if (node.name == node_name) node_id = node.id;
        const auto it = rc.detected_by.find({node_id, sensor});
        return it == rc.detected_by.end() ? 0.0 : count(it->second);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> pooled_detection_series(const ReplicationSet& set) {
    std::size_t windows = 0;
    for (const RunCounters& rc : set.replications)
        windows = std::max(windows, rc.windows.size());
    std::vector<double> series;
    series.reserve(windows);
    for (std::size_t w = 0; w < windows; ++w) {
        std::int64_t det = 0, miss = 0;
        for (const RunCounters& rc : set.replications) {
            if (w < rc.windows.size()) {
                det += rc.windows[w].detected;
                miss += rc.windows[w].missed;
            }
        }
        if (det + miss > 0)
            series.push_back(static_cast<double>(det) / static_cast<double>(det + miss));
    }
    return series;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

namespace {

// Warm-up index for metrics that have a windowed series; -1 otherwise.
int warmup_index_for(const std::string& metric, const ReplicationSet& set,
                     const Scenario& scenario) {
    std::vector<double> series;
    if (metric == "detection_fraction") {
        series = pooled_detection_series(set);
    } else if (metric.rfind("queue_mean:", 0) == 0) {
        const std::string shed_name = metric.substr(11);
        std::size_t shed_idx = 0;
        bool found = false;
        std::size_t idx = 0;
        for (const Node& node : scenario.graph.nodes) {
            if (node.kind != NodeKind::ServiceShed) continue;
            if (node.name == shed_name) {
                shed_idx = idx;
                found = true;
            }
            ++idx;
        }
        if (!found || set.replications.empty()) return -1;
        std::size_t windows = 0;
        for (const RunCounters& rc : set.replications)
            windows = std::max(windows, rc.windows.size());
        for (std::size_t w = 0; w < windows; ++w) {
            double sum = 0.0;
            int n = 0;
            for (const RunCounters& rc : set.replications) {
                if (w < rc.windows.size() && shed_idx < rc.windows[w].shed_mean_queue.size()) {
                    sum += rc.windows[w].shed_mean_queue[shed_idx];
                    ++n;
                }
            }
            if (n > 0) series.push_back(sum / n);
        }
    } else {
        return -1;
    }
    if (series.size() < 10) return -1;
    return mser_warmup(series, 5).truncation_obs;
}

}  // namespace

void export_csv(const ReplicationSet& set, const Scenario& scenario, std::ostream& out) {
    out << "scenario_hash,master_seed,replication,metric,value\n";
    if (set.replications.empty()) return;
    const std::vector<std::string> names = metric_names(scenario);
    for (std::size_t i = 0; i < set.replications.size(); ++i) {
        for (const std::string& name : names) {
            out << set.scenario_hash << ',' << set.master_seed << ',' << i << ',' << name
                << ',' << format_value(metric_value(set.replications[i], scenario, name))
                << '\n';
        }
    }
    out << "# summary\n";
    out << "metric,n,mean,sd,ci95_half_width,warmup_index\n";
    for (const std::string& name : names) {
        std::vector<double> values;
        values.reserve(set.replications.size());
        for (const RunCounters& rc : set.replications)
            values.push_back(metric_value(rc, scenario, name));
        const Summary s = summarize(values, scenario.run.confidence);
        out << name << ',' << s.n << ',' << format_value(s.mean) << ','
            << format_value(s.sd) << ',' << format_value(s.ci_half_width) << ','
            << warmup_index_for(name, set, scenario) << '\n';
    }
}

void export_csv_file(const ReplicationSet& set, const Scenario& scenario,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV to " + path);
    export_csv(set, scenario, out);
}

}  // namespace portsim
