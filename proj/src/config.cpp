#include "medchain/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace medchain {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("bad integer for " + key + ": '" + value + "'");
    return out;
}

double parse_f64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": '" + value + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

LinkModel parse_latency(const std::string& key, const std::string& value) {
    auto parts = split(value, ':');
    LinkModel link;
    if (parts[0] == "fixed" && parts.size() == 2) {
        link.latency = FixedLatency{parse_u64(key, parts[1])};
    } else if (parts[0] == "uniform" && parts.size() == 3) {
        UniformLatency u{parse_u64(key, parts[1]), parse_u64(key, parts[2])};
        if (u.lo > u.hi) throw ConfigError("uniform latency needs lo <= hi");
        link.latency = u;
    } else if (parts[0] == "normal" && parts.size() == 3) {
        NormalLatency n{parse_f64(key, parts[1]), parse_f64(key, parts[2])};
        if (n.mean < 0.0 || n.sigma < 0.0) throw ConfigError("normal latency needs mean, sigma >= 0");
        link.latency = n;
    } else {
        throw ConfigError("bad latency spec '" + value +
                          "' (want fixed:T, uniform:LO:HI, or normal:MEAN:SIGMA)");
    }
    return link;
}

VitalBounds parse_bounds(const std::string& key, const std::string& value) {
    auto parts = split(value, ':');
    if (parts.size() != 2) throw ConfigError("bad bounds for " + key + " (want LO:HI)");
    VitalBounds b{parse_milli(parts[0]), parse_milli(parts[1])};
    if (b.lo > b.hi) throw ConfigError("bounds for " + key + " need lo <= hi");
    return b;
}

const std::map<std::string, VitalKind> kBoundKeys = {
    {"heart_rate", VitalKind::HeartRate},   {"spo2", VitalKind::SpO2},
    {"temperature", VitalKind::Temperature}, {"systolic_bp", VitalKind::SystolicBP},
    {"diastolic_bp", VitalKind::DiastolicBP}, {"glucose", VitalKind::Glucose},
};

}  // namespace

Milli parse_milli(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw ConfigError("empty number");
    bool negative = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        negative = s[0] == '-';
        i = 1;
    }
    std::int64_t whole = 0, frac = 0, scale = 1000;
    bool any_digit = false, in_frac = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (in_frac) throw ConfigError("bad decimal '" + text + "'");
            in_frac = true;
            continue;
        }
        if (c < '0' || c > '9') throw ConfigError("bad decimal '" + text + "'");
        any_digit = true;
        if (!in_frac) {
            whole = whole * 10 + (c - '0');
        } else {
            if (scale == 1) throw ConfigError("more than 3 decimal places in '" + text + "'");
            scale /= 10;
            frac = frac * 10 + (c - '0');
        }
    }
    if (!any_digit) throw ConfigError("bad decimal '" + text + "'");
    std::int64_t value = whole * 1000 + frac * scale;
    return negative ? -value : value;
}

std::string format_milli(Milli value) {
    std::int64_t v = value < 0 ? -value : value;
    std::ostringstream out;
    if (value < 0) out << '-';
    out << v / 1000;
    if (v % 1000 != 0) {
        std::string frac = std::to_string(v % 1000);
        frac.insert(0, 3 - frac.size(), '0');
        while (frac.back() == '0') frac.pop_back();
        out << '.' << frac;
    }
    return out.str();
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;

    auto fail_key = [&](const std::string& key) {
        throw ConfigError("unknown key '" + key + "' in section [" + section + "] (line " +
                          std::to_string(lineno) + ")");
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("bad section header at line " + std::to_string(lineno));
            section = trim(s.substr(1, s.size() - 2));
            static const char* known[] = {"run", "devices", "net", "ledger",
                                          "contract", "records", "bench"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (auto comment = value.find_first_of("#;"); comment != std::string::npos)
            value = trim(value.substr(0, comment));
        if (section.empty()) throw ConfigError("key '" + key + "' outside any section");

        if (section == "run") {
            if (key == "seed") cfg.seed = parse_u64(key, value);
            else if (key == "duration") cfg.duration = parse_u64(key, value);
            else fail_key(key);
        } else if (section == "devices") {
            if (key == "count") cfg.device_count = parse_u64(key, value);
            else if (key == "sample_period") cfg.sample_period = parse_u64(key, value);
            else fail_key(key);
        } else if (section == "net") {
            if (key == "latency") {
                double loss = cfg.net.default_link.loss_probability;
                cfg.net.default_link = parse_latency(key, value);
                cfg.net.default_link.loss_probability = loss;
            } else if (key == "loss") {
                cfg.net.default_link.loss_probability = parse_f64(key, value);
            } else {
                fail_key(key);
            }
        } else if (section == "ledger") {
            if (key == "block_interval") cfg.ledger.block_interval = parse_u64(key, value);
            else if (key == "max_block_txs") cfg.ledger.max_block_txs = parse_u64(key, value);
            else fail_key(key);
        } else if (section == "contract") {
            if (key == "alpha_milli") cfg.contract.alpha_milli = static_cast<std::int64_t>(parse_u64(key, value));
            else if (key == "k_milli") cfg.contract.k_milli = static_cast<std::int64_t>(parse_u64(key, value));
            else if (key == "flag_after") cfg.contract.flag_after = parse_u64(key, value);
            else if (key == "warmup") cfg.contract.warmup = parse_u64(key, value);
            else if (auto it = kBoundKeys.find(key); it != kBoundKeys.end())
                cfg.contract.bounds[it->second] = parse_bounds(key, value);
            else fail_key(key);
        } else if (section == "records") {
            if (key == "storage_nodes") cfg.storage_nodes = parse_u64(key, value);
            else if (key == "replication") cfg.replication = parse_u64(key, value);
            else fail_key(key);
        } else if (section == "bench") {
            if (key == "batch_sizes") {
                cfg.bench.batch_sizes.clear();
                for (const auto& part : split(value, ','))
                    cfg.bench.batch_sizes.push_back(parse_u64(key, part));
            } else if (key == "trials") {
                cfg.bench.trials = parse_u64(key, value);
            } else if (key == "cv_bound") {
                cfg.bench.cv_bound = parse_f64(key, value);
            } else if (key == "r2_min") {
                cfg.bench.r2_min = parse_f64(key, value);
            } else {
                fail_key(key);
            }
        }
    }

    // Cross-field constraints.
    if (cfg.device_count == 0) throw ConfigError("[devices] count must be >= 1");
    if (cfg.sample_period == 0) throw ConfigError("[devices] sample_period must be >= 1");
    if (cfg.ledger.block_interval == 0) throw ConfigError("[ledger] block_interval must be >= 1");
    if (cfg.ledger.max_block_txs == 0) throw ConfigError("[ledger] max_block_txs must be >= 1");
    if (cfg.contract.alpha_milli < 1 || cfg.contract.alpha_milli > 1000)
        throw ConfigError("[contract] alpha_milli must be in 1..1000");
    if (cfg.contract.k_milli < 0) throw ConfigError("[contract] k_milli must be >= 0");
    if (cfg.contract.flag_after == 0) throw ConfigError("[contract] flag_after must be >= 1");
    double loss = cfg.net.default_link.loss_probability;
    if (loss < 0.0 || loss > 1.0) throw ConfigError("[net] loss must be in [0, 1]");
    if (cfg.replication == 0) throw ConfigError("[records] replication must be >= 1");
    if (cfg.replication > cfg.storage_nodes)
        throw ConfigError("[records] replication cannot exceed storage_nodes");
    if (cfg.bench.trials == 0) throw ConfigError("[bench] trials must be >= 1");
    if (cfg.bench.cv_bound <= 0.0) throw ConfigError("[bench] cv_bound must be > 0");
    if (cfg.bench.r2_min < 0.0 || cfg.bench.r2_min > 1.0)
        throw ConfigError("[bench] r2_min must be in [0, 1]");
    for (std::size_t i = 0; i + 1 < cfg.bench.batch_sizes.size(); ++i)
        if (cfg.bench.batch_sizes[i] >= cfg.bench.batch_sizes[i + 1])
            throw ConfigError("[bench] batch_sizes must be strictly ascending");
    cfg.bench.device_count = cfg.device_count;
    cfg.net.seed = cfg.seed;
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string default_config_text() {
    return R"(# medchain run configuration
# Values shown are the defaults; one section per module.

[run]
seed = 42
duration = 30000          # simulated ticks (1 tick = 1 ms)

[devices]
count = 4
sample_period = 400       # ticks between samples per device

[net]
latency = normal:120:30   # fixed:T | uniform:LO:HI | normal:MEAN:SIGMA (ticks)
loss = 0.0

[ledger]
block_interval = 1000     # ticks between block-formation opportunities
max_block_txs = 16

[contract]
alpha_milli = 100         # EWMA smoothing (alpha = 0.100)
k_milli = 4000            # deviation threshold (k = 4.000)
flag_after = 5            # consecutive violations that flag a device
warmup = 20               # samples before the statistical test activates
# Inclusive plausibility bounds, in measurement units.
heart_rate = 25:250
spo2 = 50:100
temperature = 30:45
systolic_bp = 60:250
diastolic_bp = 30:150
glucose = 20:600

[records]
storage_nodes = 3
replication = 3

[bench]
batch_sizes = 50,100,150,200
trials = 5
cv_bound = 0.15
r2_min = 0.9
)";
}

}  // namespace medchain
