#include "medchain/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "medchain/runner.hpp"

namespace medchain {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    LinearFit fit;
    if (x.size() != y.size() || x.size() < 2) return fit;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
    fit.valid = true;
    return fit;
}

BenchReport run_benchmark(const RunConfig& config) {
    if (config.bench.device_count < 1) throw ConfigError("bench needs at least one device");

    BenchReport report;
    report.device_count = config.bench.device_count;
    report.trials = config.bench.trials;

    struct Acc {
        double processing = 0.0;
        double delay = 0.0;
    };

    for (std::size_t batch : config.bench.batch_sizes) {
        if (batch == 0) continue;  // nothing to submit, no row

        std::map<NodeId, Acc> acc;
        for (std::size_t trial = 0; trial < config.bench.trials; ++trial) {
            RunConfig trial_cfg = config;
            trial_cfg.device_count = config.bench.device_count;
            trial_cfg.seed = derive_seed(config.seed, "trial-" + std::to_string(trial) +
                                                          "-batch-" + std::to_string(batch));
            trial_cfg.net.seed = trial_cfg.seed;

            auto dir = std::filesystem::temp_directory_path() /
                       ("medchain-bench-" + std::to_string(trial_cfg.seed));
            Scenario scenario(trial_cfg, dir, false);
            scenario.run_batch(batch);

            std::map<NodeId, std::vector<TxTiming>> per_device;
            for (const auto& timing : telemetry_timings(scenario.chain().blocks()))
                per_device[timing.submitter].push_back(timing);

            for (const auto& profile : scenario.fleet()) {
                const auto& timings = per_device[profile.device_id];
                if (timings.empty())
                    throw std::runtime_error("no committed telemetry for " + profile.device_id);
                Ticks first_submit = timings.front().submit_time;
                Ticks last_commit = 0;
                double delay_sum = 0.0;
                for (const auto& t : timings) {
                    last_commit = std::max(last_commit, t.commit_time);
                    delay_sum += static_cast<double>(t.commit_time - t.submit_time);
                }
                Acc& a = acc[profile.device_id];
                a.processing += static_cast<double>(last_commit - first_submit) / 1000.0;
                a.delay += delay_sum / static_cast<double>(timings.size()) / 1000.0;
            }
        }

        BatchBenchRow row;
        row.batch = batch;
        const double trials = static_cast<double>(config.bench.trials);
        for (std::size_t d = 1; d <= config.bench.device_count; ++d) {
            const NodeId device = "device-" + std::to_string(d);
            const Acc& a = acc.at(device);
            DeviceBenchCell cell;
            cell.device = device;
            cell.processing_time_s = a.processing / trials;
            cell.average_delay_s = a.delay / trials;
            cell.throughput_tps = static_cast<double>(batch) / cell.processing_time_s;
            row.devices.push_back(std::move(cell));
        }

        double mean = 0.0;
        for (const auto& cell : row.devices) mean += cell.average_delay_s;
        mean /= static_cast<double>(row.devices.size());
        double var = 0.0;
        for (const auto& cell : row.devices) {
            double d = cell.average_delay_s - mean;
            var += d * d;
        }
        var /= static_cast<double>(row.devices.size());
        row.delay_mean_s = mean;
        row.delay_stddev_s = std::sqrt(var);
        row.delay_cv = mean > 0.0 ? row.delay_stddev_s / mean : 0.0;
        report.batches.push_back(std::move(row));
    }
    return report;
}

bool check_parity(const BenchReport& report, double cv_bound) {
    if (report.device_count < 2) throw std::invalid_argument("parity needs >= 2 devices");
    for (const auto& row : report.batches)
        if (row.delay_cv > cv_bound) return false;
    return true;
}

bool check_scaling(const BenchReport& report, double r2_min) {
    if (report.batches.size() < 3)
        throw std::invalid_argument("scaling needs >= 3 batch sizes");

    std::map<NodeId, std::vector<double>> per_device;
    std::vector<double> batches;
    for (const auto& row : report.batches) {
        batches.push_back(static_cast<double>(row.batch));
        for (const auto& cell : row.devices)
            per_device[cell.device].push_back(cell.processing_time_s);
    }
    for (const auto& [device, times] : per_device) {
        LinearFit fit = linear_fit(batches, times);
        if (!fit.valid || fit.slope <= 0.0 || fit.r2 < r2_min) return false;
    }
    return true;
}

const ReferenceTable& reference_processing_time() {
    static const ReferenceTable table{
        {50, 100, 150, 200},
        {{{20.0, 22.0, 18.0, 23.0},
          {31.0, 41.0, 37.0, 45.0},
          {55.0, 62.0, 58.0, 67.0},
          {82.0, 84.0, 73.0, 91.0}}},
    };
    return table;
}

const ReferenceTable& reference_average_delay() {
    static const ReferenceTable table{
        {50, 100, 150, 200},
        {{{0.8, 0.9, 0.7, 0.8},
          {2.1, 2.0, 1.9, 1.7},
          {2.4, 1.8, 2.6, 2.1},
          {3.6, 3.2, 3.3, 3.0}}},
    };
    return table;
}

LinearFit reference_column_fit(const ReferenceTable& table, std::size_t device_index) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < table.batch_sizes.size(); ++i) {
        x.push_back(static_cast<double>(table.batch_sizes[i]));
        y.push_back(table.values[i][device_index]);
    }
    return linear_fit(x, y);
}

namespace {

std::string format_seconds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const BenchReport& report,
               double DeviceBenchCell::*field) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "n_transactions";
    for (std::size_t d = 0; d < report.device_count; ++d) out << ",device_" << d + 1;
    out << '\n';
    for (const auto& row : report.batches) {
        out << row.batch;
        for (const auto& cell : row.devices) out << ',' << format_seconds(cell.*field);
        out << '\n';
    }
}

nlohmann::json reference_json(const ReferenceTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table.batch_sizes.size(); ++i) {
        nlohmann::json row;
        row["n_transactions"] = table.batch_sizes[i];
        for (std::size_t d = 0; d < table.values[i].size(); ++d)
            row["device_" + std::to_string(d + 1)] = table.values[i][d];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<std::filesystem::path> emit_tables(const BenchReport& report,
                                               const BenchCheckOutcome& checks,
                                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> paths;

    paths.push_back(out_dir / "table4_processing_time.csv");
    write_csv(paths.back(), report, &DeviceBenchCell::processing_time_s);
    paths.push_back(out_dir / "table5_average_delay.csv");
    write_csv(paths.back(), report, &DeviceBenchCell::average_delay_s);

    nlohmann::json j;
    j["device_count"] = report.device_count;
    j["trials"] = report.trials;
    nlohmann::json batches = nlohmann::json::array();
    for (const auto& row : report.batches) {
        nlohmann::json b;
        b["n_transactions"] = row.batch;
        nlohmann::json devices = nlohmann::json::array();
        for (const auto& cell : row.devices) {
            nlohmann::json d;
            d["device"] = cell.device;
            d["processing_time_s"] = cell.processing_time_s;
            d["average_delay_s"] = cell.average_delay_s;
            d["throughput_tps"] = cell.throughput_tps;
            devices.push_back(std::move(d));
        }
        b["devices"] = std::move(devices);
        b["delay_mean_s"] = row.delay_mean_s;
        b["delay_stddev_s"] = row.delay_stddev_s;
        b["delay_cv"] = row.delay_cv;
        batches.push_back(std::move(b));
    }
    j["batches"] = std::move(batches);
    j["checks"]["parity"] = checks.parity;
    j["checks"]["scaling"] = checks.scaling;
    j["reference"]["source"] = "published Ethereum-testnet measurements (comparison only)";
    j["reference"]["processing_time_s"] = reference_json(reference_processing_time());
    j["reference"]["average_delay_s"] = reference_json(reference_average_delay());

    paths.push_back(out_dir / "report.json");
    std::ofstream out(paths.back(), std::ios::trunc);
    if (!out) throw IoError("cannot write " + paths.back().string());
    out << j.dump(2) << '\n';
    return paths;
}

}  // namespace medchain
