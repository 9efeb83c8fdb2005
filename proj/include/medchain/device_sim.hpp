#pragma once

#include <optional>
#include <vector>

#include "medchain/transaction.hpp"

namespace medchain {

/// splitmix64 stream. Named and fixed so traces are reproducible within this
/// implementation; bit-equality across implementations is not promised.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller. Consumes exactly two uniforms; the
    /// sine branch is discarded.
    double next_gaussian();

private:
    std::uint64_t state_;
};

/// First 8 bytes (big-endian) of SHA-256 over the canonical (seed, index)
/// pair; used to give every device its own independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

struct DeviceProfile {
    NodeId device_id;
    std::string patient_id;
    VitalKind vital_kind = VitalKind::HeartRate;
    Milli baseline = 0;
    Milli diurnal_amplitude = 0;
    Milli noise_sigma = 0;
    Ticks sample_period = 400;
    std::uint64_t seed = 0;

    bool operator==(const DeviceProfile&) const = default;
};

struct StuckAtFault {
    Milli value = 0;
};
struct DriftFault {
    Milli rate_per_sample = 0;
};
struct NoiseBurstFault {
    double sigma_multiplier = 1.0;
};
struct DropoutFault {
    double probability = 0.0;
};

struct FaultSpec {
    std::variant<StuckAtFault, DriftFault, NoiseBurstFault, DropoutFault> kind;
    Ticks onset = 0;
};

/// Sequential generator for one device. Sampling t must be a multiple of the
/// profile's sample_period and strictly increasing across calls.
///
/// Per sample, in order: an active Dropout draws one uniform and may emit
/// nothing; otherwise the healthy value is baseline + diurnal + one gaussian
/// draw of the effective sigma (NoiseBurst scales it), then StuckAt replaces
/// the value and Drift adds rate x (faulted samples so far, 1-based).
class DeviceSimulator {
public:
    DeviceSimulator(DeviceProfile profile, std::optional<FaultSpec> fault)
        : profile_(std::move(profile)), fault_(std::move(fault)), rng_(profile_.seed) {}

    const DeviceProfile& profile() const { return profile_; }

    std::optional<TelemetryReading> sample(Ticks t);

    /// Reading wrapped as a TelemetryTx with consecutive nonces from 1.
    std::optional<Transaction> sample_tx(Ticks t);

    std::uint64_t emitted() const { return nonce_; }

private:
    DeviceProfile profile_;
    std::optional<FaultSpec> fault_;
    SplitMix64 rng_;
    std::uint64_t faulted_samples_ = 0;
    std::uint64_t nonce_ = 0;
};

/// One reading per sample instant t = 0, P, 2P, ... < until, minus dropouts.
std::vector<Transaction> run_device(const DeviceProfile& profile,
                                    std::optional<FaultSpec> fault, Ticks until);

/// n profiles with default baselines rotated across devices and per-device
/// seeds derived from (seed, index).
std::vector<DeviceProfile> default_fleet(std::size_t n, std::uint64_t seed);

}  // namespace medchain
