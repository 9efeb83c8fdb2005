#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "medchain/chain.hpp"
#include "medchain/simnet.hpp"

namespace medchain {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct BenchSettings {
    std::size_t device_count = 4;
    std::vector<std::size_t> batch_sizes = {50, 100, 150, 200};
    std::size_t trials = 5;
    double cv_bound = 0.15;
    double r2_min = 0.9;
};

/// Top-level run configuration; sections mirror the module names. Unknown
/// sections or keys are rejected.
struct RunConfig {
    std::uint64_t seed = 42;
    Ticks duration = 30'000;

    std::size_t device_count = 4;
    Ticks sample_period = 400;

    NetConfig net;

    LedgerParams ledger;
    ContractParams contract;

    std::size_t storage_nodes = 3;
    std::size_t replication = 3;

    BenchSettings bench;
};

/// Parses and validates INI-style text ('#' or ';' comments, [section],
/// key = value). Throws ConfigError on unknown keys, bad values, or
/// violated constraints.
RunConfig parse_config(const std::string& text);

RunConfig load_config_file(const std::string& path);

/// The default configuration, rendered as the annotated file `init` writes.
std::string default_config_text();

/// Exact decimal-to-milliunits conversion; accepts up to three fractional
/// digits ("36.8" -> 36800).
Milli parse_milli(const std::string& text);
std::string format_milli(Milli value);

}  // namespace medchain
