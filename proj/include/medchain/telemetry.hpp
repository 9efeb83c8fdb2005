#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "medchain/codec.hpp"

namespace medchain {

/// Simulated time in ticks; one tick is one millisecond.
using Ticks = std::uint64_t;

/// Measured quantities are fixed-point integers in milliunits
/// (value x 1000), so hashed content never contains floating point.
using Milli = std::int64_t;

enum class VitalKind : std::uint8_t {
    HeartRate = 0,    // bpm
    SpO2 = 1,         // percent
    Temperature = 2,  // degrees C
    SystolicBP = 3,   // mmHg
    DiastolicBP = 4,  // mmHg
    Glucose = 5,      // mg/dL
};

inline constexpr VitalKind kAllVitalKinds[] = {
    VitalKind::HeartRate,  VitalKind::SpO2,        VitalKind::Temperature,
    VitalKind::SystolicBP, VitalKind::DiastolicBP, VitalKind::Glucose,
};

std::string_view vital_kind_name(VitalKind kind);
std::optional<VitalKind> vital_kind_from_name(std::string_view name);

/// One sensed vital-sign sample from a device node.
struct TelemetryReading {
    std::string device_id;
    std::string patient_id;
    VitalKind vital_kind = VitalKind::HeartRate;
    Milli value = 0;
    Ticks timestamp = 0;

    bool operator==(const TelemetryReading&) const = default;
};

void encode(Encoder& enc, const TelemetryReading& r);
TelemetryReading decode_reading(Decoder& dec);

}  // namespace medchain
