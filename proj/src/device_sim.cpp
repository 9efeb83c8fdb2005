#include "medchain/device_sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace medchain {

namespace {
constexpr Ticks kDiurnalPeriod = 86'400'000;  // 24 simulated hours
}

double SplitMix64::next_gaussian() {
    // u1 in (0, 1] so the log is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    Encoder enc;
    enc.put_u64(seed);
    enc.put_u64(index);
    Digest256 d = hash_bytes(enc.bytes());
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[static_cast<std::size_t>(i)];
    return v;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    Encoder enc;
    enc.put_u64(seed);
    enc.put_string(label);
    Digest256 d = hash_bytes(enc.bytes());
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[static_cast<std::size_t>(i)];
    return v;
}

std::optional<TelemetryReading> DeviceSimulator::sample(Ticks t) {
    if (profile_.sample_period == 0 || t % profile_.sample_period != 0)
        throw std::invalid_argument("sample time not a multiple of sample_period");

    const bool fault_active = fault_ && t >= fault_->onset;
    if (fault_active) ++faulted_samples_;

    if (fault_active) {
        if (const auto* drop = std::get_if<DropoutFault>(&fault_->kind)) {
            if (rng_.next_unit() < drop->probability) return std::nullopt;
        }
    }

    double sigma = static_cast<double>(profile_.noise_sigma);
    if (fault_active) {
        if (const auto* burst = std::get_if<NoiseBurstFault>(&fault_->kind))
            sigma *= burst->sigma_multiplier;
    }

    const double phase = 2.0 * std::numbers::pi *
                         static_cast<double>(t % kDiurnalPeriod) /
                         static_cast<double>(kDiurnalPeriod);
    double value = static_cast<double>(profile_.baseline) +
                   static_cast<double>(profile_.diurnal_amplitude) * std::sin(phase) +
                   sigma * rng_.next_gaussian();

    Milli milli = std::llround(value);
    if (fault_active) {
        if (const auto* stuck = std::get_if<StuckAtFault>(&fault_->kind))
            milli = stuck->value;
        else if (const auto* drift = std::get_if<DriftFault>(&fault_->kind))
            milli += drift->rate_per_sample * static_cast<Milli>(faulted_samples_);
    }

    return TelemetryReading{profile_.device_id, profile_.patient_id,
                            profile_.vital_kind, milli, t};
}

std::optional<Transaction> DeviceSimulator::sample_tx(Ticks t) {
    auto reading = sample(t);
    if (!reading) return std::nullopt;
    Transaction tx;
    tx.kind = TelemetryTx{*std::move(reading)};
    tx.submitter = profile_.device_id;
    tx.submit_time = t;
    tx.nonce = ++nonce_;
    return tx;
}

std::vector<Transaction> run_device(const DeviceProfile& profile,
                                    std::optional<FaultSpec> fault, Ticks until) {
    DeviceSimulator sim(profile, std::move(fault));
    std::vector<Transaction> out;
    for (Ticks t = 0; t < until; t += profile.sample_period)
        if (auto tx = sim.sample_tx(t)) out.push_back(*std::move(tx));
    return out;
}

std::vector<DeviceProfile> default_fleet(std::size_t n, std::uint64_t seed) {
    struct Defaults {
        VitalKind kind;
        Milli baseline;
        Milli amplitude;
        Milli sigma;
    };
    // Baselines sit >= 10 sigma inside the plausibility bounds.
    static constexpr Defaults kRotation[] = {
        {VitalKind::HeartRate, 72'000, 3'000, 1'500},
        {VitalKind::SpO2, 97'000, 500, 250},
        {VitalKind::Temperature, 36'800, 300, 100},
        {VitalKind::SystolicBP, 118'000, 5'000, 4'000},
    };

    std::vector<DeviceProfile> fleet;
    fleet.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Defaults& d = kRotation[i % std::size(kRotation)];
        DeviceProfile p;
        p.device_id = "device-" + std::to_string(i + 1);
        p.patient_id = "patient-" + std::to_string(i + 1);
        p.vital_kind = d.kind;
        p.baseline = d.baseline;
        p.diurnal_amplitude = d.amplitude;
        p.noise_sigma = d.sigma;
        p.sample_period = 400;
        p.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        fleet.push_back(std::move(p));
    }
    return fleet;
}

}  // namespace medchain
