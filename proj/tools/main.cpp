#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "medchain/bench.hpp"
#include "medchain/runner.hpp"

namespace fs = std::filesystem;
using namespace medchain;

namespace {

// Exit codes: 0 success, 1 check failed, 2 usage, 3 bad config, 4 I/O.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsageError = 2;
constexpr int kConfigInvalid = 3;
constexpr int kIoFailure = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t duration = 0;
    bool duration_set = false;
    bool trace = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_trace = true) {
    cmd->add_option("--config", opts.config_path, "Configuration file (defaults when omitted)");
    cmd->add_option("--out-dir", opts.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "Override [run] seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--duration", opts.duration, "Override [run] duration (ticks)")
        ->each([&](const std::string&) { opts.duration_set = true; });
    if (with_trace) cmd->add_flag("--trace", opts.trace, "Write the dispatch log (trace.jsonl)");
}

RunConfig effective_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? parse_config(default_config_text())
                                             : load_config_file(opts.config_path);
    if (opts.seed_set) {
        cfg.seed = opts.seed;
        cfg.net.seed = opts.seed;
    }
    if (opts.duration_set) cfg.duration = opts.duration;
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

std::string config_echo(const RunConfig& cfg) {
    // Minimal round-trippable echo of the effective configuration.
    std::ostringstream out;
    out << "[run]\nseed = " << cfg.seed << "\nduration = " << cfg.duration << "\n\n";
    out << "[devices]\ncount = " << cfg.device_count
        << "\nsample_period = " << cfg.sample_period << "\n\n";
    out << "[net]\n";
    if (const auto* f = std::get_if<FixedLatency>(&cfg.net.default_link.latency))
        out << "latency = fixed:" << f->value << '\n';
    else if (const auto* u = std::get_if<UniformLatency>(&cfg.net.default_link.latency))
        out << "latency = uniform:" << u->lo << ':' << u->hi << '\n';
    else if (const auto* n = std::get_if<NormalLatency>(&cfg.net.default_link.latency))
        out << "latency = normal:" << n->mean << ':' << n->sigma << '\n';
    out << "loss = " << cfg.net.default_link.loss_probability << "\n\n";
    out << "[ledger]\nblock_interval = " << cfg.ledger.block_interval
        << "\nmax_block_txs = " << cfg.ledger.max_block_txs << "\n\n";
    out << "[contract]\nalpha_milli = " << cfg.contract.alpha_milli
        << "\nk_milli = " << cfg.contract.k_milli << "\nflag_after = " << cfg.contract.flag_after
        << "\nwarmup = " << cfg.contract.warmup << '\n';
    static const std::pair<VitalKind, const char*> kBoundKeys[] = {
        {VitalKind::HeartRate, "heart_rate"},     {VitalKind::SpO2, "spo2"},
        {VitalKind::Temperature, "temperature"},  {VitalKind::SystolicBP, "systolic_bp"},
        {VitalKind::DiastolicBP, "diastolic_bp"}, {VitalKind::Glucose, "glucose"},
    };
    for (const auto& [kind, key] : kBoundKeys) {
        const auto& b = cfg.contract.bounds.at(kind);
        out << key << " = " << format_milli(b.lo) << ':' << format_milli(b.hi) << '\n';
    }
    out << "\n[records]\nstorage_nodes = " << cfg.storage_nodes
        << "\nreplication = " << cfg.replication << "\n\n";
    out << "[bench]\nbatch_sizes = ";
    for (std::size_t i = 0; i < cfg.bench.batch_sizes.size(); ++i)
        out << (i ? "," : "") << cfg.bench.batch_sizes[i];
    out << "\ntrials = " << cfg.bench.trials << "\ncv_bound = " << cfg.bench.cv_bound
        << "\nr2_min = " << cfg.bench.r2_min << '\n';
    return out.str();
}

std::optional<FaultSpec> parse_fault(const std::string& kind_spec, Ticks onset) {
    auto colon = kind_spec.find(':');
    std::string name = kind_spec.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : kind_spec.substr(colon + 1);
    FaultSpec fault;
    fault.onset = onset;
    try {
        if (name == "stuck-at") {
            fault.kind = StuckAtFault{parse_milli(arg)};
        } else if (name == "drift") {
            fault.kind = DriftFault{parse_milli(arg)};
        } else if (name == "noise-burst") {
            fault.kind = NoiseBurstFault{std::stod(arg)};
        } else if (name == "dropout") {
            double p = std::stod(arg);
            if (p < 0.0 || p > 1.0) return std::nullopt;
            fault.kind = DropoutFault{p};
        } else {
            return std::nullopt;
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return fault;
}

nlohmann::json summary_json(const RunConfig& cfg, const ScenarioResult& result, bool traced) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["state_root"] = result.state_root.hex();
    j["chain_height"] = result.chain_height;
    j["committed_txs"] = result.committed_txs;
    j["rejected_txs"] = result.rejected_txs;
    j["flagged"] = result.flagged;
    j["net"]["sends"] = result.net.sends;
    j["net"]["delivered"] = result.net.delivered;
    j["net"]["dropped"] = result.net.dropped;
    j["net"]["blocks_formed"] = result.net.blocks_formed;
    if (traced) j["trace_digest"] = result.trace_digest.hex();
    return j;
}

void write_run_outputs(const fs::path& out_dir, const RunConfig& cfg, Scenario& scenario,
                       const ScenarioResult& result, bool traced) {
    std::ostringstream chain_text;
    scenario.chain().export_blocks(chain_text);
    write_text(out_dir / "chain.hex", chain_text.str());

    std::ostringstream audit;
    for (const auto& entry : scenario.chain().audit_log()) {
        nlohmann::json j;
        j["t"] = entry.time;
        j["submitter"] = entry.submitter;
        j["nonce"] = entry.nonce;
        j["reason"] = entry.reason;
        audit << j.dump() << '\n';
    }
    write_text(out_dir / "audit.jsonl", audit.str());

    std::ostringstream flagged;
    for (const auto& event : result.flag_events) {
        nlohmann::json j;
        j["t"] = event.t;
        j["device"] = event.device_id;
        j["vital_kind"] = vital_kind_name(event.vital_kind);
        j["flagged_at_sample"] = event.flagged_at_sample;
        flagged << j.dump() << '\n';
    }
    write_text(out_dir / "flagged.jsonl", flagged.str());

    write_text(out_dir / "summary.json", summary_json(cfg, result, traced).dump(2) + "\n");
    write_text(out_dir / "config.ini", config_echo(cfg));
    if (traced) write_text(out_dir / "trace.jsonl", result.trace_jsonl);
}

int cmd_init(const std::string& out_path, bool force) {
    if (!force && fs::exists(out_path)) {
        std::cerr << "refusing to overwrite " << out_path << " (use --force)\n";
        return kIoFailure;
    }
    write_text(out_path, default_config_text());
    std::cout << "wrote " << out_path << '\n';
    return kOk;
}

int cmd_run(const CommonOpts& opts) {
    RunConfig cfg = effective_config(opts);
    fs::path out_dir(opts.out_dir);
    Scenario scenario(cfg, out_dir / "records", opts.trace);
    ScenarioResult result = scenario.run();
    write_run_outputs(out_dir, cfg, scenario, result, opts.trace);

    std::cout << "state_root: " << result.state_root.hex() << '\n'
              << "height: " << result.chain_height << '\n'
              << "committed: " << result.committed_txs << '\n'
              << "rejected: " << result.rejected_txs << '\n';
    if (opts.trace) std::cout << "trace_digest: " << result.trace_digest.hex() << '\n';
    return kOk;
}

int cmd_bench(const CommonOpts& opts, bool wall_clock) {
    RunConfig cfg = effective_config(opts);
    auto wall_start = std::chrono::steady_clock::now();
    BenchReport report = run_benchmark(cfg);
    if (wall_clock) {
        // Implementation speed only; simulated seconds are the measurements.
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        std::cerr << "wall-clock (harness execution, not simulated time): " << elapsed
                  << " s for " << cfg.bench.trials << " trials x "
                  << cfg.bench.batch_sizes.size() << " batch sizes\n";
    }
    BenchCheckOutcome checks;
    checks.parity = check_parity(report, cfg.bench.cv_bound);
    checks.scaling = check_scaling(report, cfg.bench.r2_min);
    auto paths = emit_tables(report, checks, opts.out_dir);
    for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
    std::cout << "parity (delay cv <= " << cfg.bench.cv_bound << "): "
              << (checks.parity ? "pass" : "FAIL") << '\n'
              << "scaling (r2 >= " << cfg.bench.r2_min << "): "
              << (checks.scaling ? "pass" : "FAIL") << '\n';
    return checks.pass() ? kOk : kCheckFailed;
}

int cmd_inject_fault(const CommonOpts& opts, const std::string& device,
                     const std::string& kind_spec, Ticks onset) {
    auto fault = parse_fault(kind_spec, onset);
    if (!fault) {
        std::cerr << "bad --kind '" << kind_spec
                  << "' (want stuck-at:V, drift:R, noise-burst:M, or dropout:P)\n";
        return kUsageError;
    }
    RunConfig cfg = effective_config(opts);
    fs::path out_dir(opts.out_dir);
    Scenario scenario(cfg, out_dir / "records", opts.trace);
    try {
        scenario.inject_fault(device, *fault);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return kUsageError;
    }
    ScenarioResult result = scenario.run();
    write_run_outputs(out_dir, cfg, scenario, result, opts.trace);

    if (result.flagged.empty()) {
        std::cout << "flagged: none\n";
    } else {
        std::cout << "flagged:";
        for (const auto& id : result.flagged) std::cout << ' ' << id;
        std::cout << '\n';
    }
    return kOk;
}

int cmd_query(const std::string& run_dir, const std::string& config_path,
              const std::string& requester_id, const std::string& record_id) {
    fs::path dir(run_dir);
    std::string cfg_path = config_path.empty() ? (dir / "config.ini").string() : config_path;
    RunConfig cfg = load_config_file(cfg_path);

    std::ifstream chain_file(dir / "chain.hex");
    if (!chain_file) throw IoError("cannot open " + (dir / "chain.hex").string());
    ImportResult imported = import_blocks(chain_file);
    if (!imported.validation.ok) {
        std::cerr << "chain invalid at height " << imported.validation.failing_height << ": "
                  << chain_fault_name(imported.validation.fault) << '\n';
        return kCheckFailed;
    }

    // Rebuild enough state to serve the query: registry from config, access
    // table and anchors replayed from the committed chain.
    Scenario scenario(cfg, dir / "records", false);
    Chain& chain = scenario.chain();
    for (const auto& block : imported.blocks)
        if (block.height > 0)
            for (const auto& tx : block.txs) chain.submit(tx);
    for (const auto& block : imported.blocks)
        if (block.height > 0) chain.form_block(block.timestamp);

    auto requester = scenario.identity_of(requester_id);
    if (!requester) {
        std::cerr << "unknown identity " << requester_id << '\n';
        return kCheckFailed;
    }
    FetchResult fetched = scenario.store().get_record(record_id, *requester);
    if (!fetched.ok()) {
        std::cerr << "query failed: " << fetch_status_name(fetched.status) << '\n';
        return kCheckFailed;
    }
    nlohmann::json j;
    j["patient_id"] = fetched.record.patient_id;
    j["patient_name"] = fetched.record.patient_name;
    j["disease_history"] = fetched.record.disease_history;
    j["medicines_prescribed"] = fetched.record.medicines_prescribed;
    std::cout << j.dump(2) << '\n';
    return kOk;
}

int cmd_verify(const std::string& chain_path) {
    std::ifstream in(chain_path);
    if (!in) throw IoError("cannot open " + chain_path);
    ImportResult imported = import_blocks(in);
    if (!imported.validation.ok) {
        std::cout << "invalid at height " << imported.validation.failing_height << ": "
                  << chain_fault_name(imported.validation.fault) << '\n';
        return kCheckFailed;
    }
    std::cout << "ok: " << imported.blocks.size() << " blocks, state_root "
              << state_root_of(imported.blocks).hex() << '\n';
    return kOk;
}

int cmd_export(const CommonOpts& opts, const std::string& what, const std::string& out_path,
               const std::string& device, const std::string& kind_spec, Ticks onset) {
    RunConfig cfg = effective_config(opts);
    bool want_trace = what == "trace";
    Scenario scenario(cfg, fs::path(opts.out_dir) / "records", want_trace);
    if (!device.empty()) {
        auto fault = parse_fault(kind_spec, onset);
        if (!fault) {
            std::cerr << "bad --kind '" << kind_spec << "'\n";
            return kUsageError;
        }
        scenario.inject_fault(device, *fault);
    }
    ScenarioResult result = scenario.run();

    std::string payload;
    if (what == "chain") {
        std::ostringstream text;
        scenario.chain().export_blocks(text);
        payload = text.str();
    } else if (what == "trace") {
        payload = result.trace_jsonl;
    } else if (what == "telemetry-csv") {
        payload = scenario.telemetry_csv();
    } else {
        std::cerr << "bad --what '" << what << "' (want chain, trace, or telemetry-csv)\n";
        return kUsageError;
    }
    if (out_path.empty() || out_path == "-")
        std::cout << payload;
    else
        write_text(out_path, payload);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator and benchmark harness for a blockchain-secured,\n"
                 "IoT-fed, distributed medical-record system."};
    app.require_subcommand(1);

    std::string init_out = "medchain.ini";
    bool init_force = false;
    auto* init = app.add_subcommand("init", "Write the default configuration file");
    init->add_option("--out", init_out, "Destination path")->capture_default_str();
    init->add_flag("--force", init_force, "Overwrite an existing file");

    CommonOpts run_opts;
    auto* run = app.add_subcommand("run", "End-to-end seeded simulation");
    add_common(run, run_opts);

    CommonOpts bench_opts;
    bool bench_wall_clock = false;
    auto* bench = app.add_subcommand("bench", "Benchmark batches and emit the tables");
    add_common(bench, bench_opts, false);
    bench->add_flag("--wall-clock", bench_wall_clock,
                    "Also report harness wall-clock time (to stderr; informational only)");

    CommonOpts fault_opts;
    std::string fault_device, fault_kind;
    Ticks fault_onset = 0;
    auto* inject = app.add_subcommand("inject-fault", "Run with a device fault attached");
    add_common(inject, fault_opts);
    inject->add_option("--device", fault_device, "Faulted device id")->required();
    inject->add_option("--kind", fault_kind,
                       "stuck-at:V | drift:R | noise-burst:M | dropout:P")->required();
    inject->add_option("--onset", fault_onset, "Fault onset (ticks)")->capture_default_str();

    std::string query_run_dir = "out", query_config, query_as, query_record;
    auto* query = app.add_subcommand("query", "Fetch a record from a previous run");
    query->add_option("--run-dir", query_run_dir, "Directory a previous run wrote")
        ->capture_default_str();
    query->add_option("--config", query_config, "Config override (default: run-dir/config.ini)");
    query->add_option("--as", query_as, "Requesting identity")->required();
    query->add_option("--record", query_record, "Record id")->required();

    std::string verify_chain;
    auto* verify = app.add_subcommand("verify", "Validate an exported chain file");
    verify->add_option("--chain", verify_chain, "chain.hex path")->required();

    CommonOpts export_opts;
    std::string export_what = "chain", export_out, export_device, export_kind;
    Ticks export_onset = 0;
    auto* exp = app.add_subcommand("export", "Run and write one artifact");
    add_common(exp, export_opts);
    exp->add_option("--what", export_what, "chain | trace | telemetry-csv")
        ->capture_default_str();
    exp->add_option("--out", export_out, "Output path (stdout when omitted)");
    exp->add_option("--device", export_device, "Optional faulted device id");
    exp->add_option("--kind", export_kind, "Fault kind (with --device)");
    exp->add_option("--onset", export_onset, "Fault onset (ticks)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (init->parsed()) return cmd_init(init_out, init_force);
        if (run->parsed()) return cmd_run(run_opts);
        if (bench->parsed()) return cmd_bench(bench_opts, bench_wall_clock);
        if (inject->parsed())
            return cmd_inject_fault(fault_opts, fault_device, fault_kind, fault_onset);
        if (query->parsed()) return cmd_query(query_run_dir, query_config, query_as, query_record);
        if (verify->parsed()) return cmd_verify(verify_chain);
        if (exp->parsed())
            return cmd_export(export_opts, export_what, export_out, export_device, export_kind,
                              export_onset);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoFailure;
    }
    return kUsageError;
}
