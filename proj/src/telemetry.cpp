#include "medchain/telemetry.hpp"

namespace medchain {

std::string_view vital_kind_name(VitalKind kind) {
    switch (kind) {
        case VitalKind::HeartRate: return "heart_rate";
        case VitalKind::SpO2: return "spo2";
        case VitalKind::Temperature: return "temperature";
        case VitalKind::SystolicBP: return "systolic_bp";
        case VitalKind::DiastolicBP: return "diastolic_bp";
        case VitalKind::Glucose: return "glucose";
    }
    return "unknown";
}

std::optional<VitalKind> vital_kind_from_name(std::string_view name) {
    for (auto kind : kAllVitalKinds)
        if (vital_kind_name(kind) == name) return kind;
    return std::nullopt;
}

void encode(Encoder& enc, const TelemetryReading& r) {
    enc.put_string(r.device_id);
    enc.put_string(r.patient_id);
    enc.put_u8(static_cast<std::uint8_t>(r.vital_kind));
    enc.put_i64(r.value);
    enc.put_u64(r.timestamp);
}

TelemetryReading decode_reading(Decoder& dec) {
    TelemetryReading r;
    r.device_id = dec.get_string();
    r.patient_id = dec.get_string();
    std::uint8_t tag = dec.get_u8();
    if (tag > static_cast<std::uint8_t>(VitalKind::Glucose))
        throw DecodeError("bad vital kind tag");
    r.vital_kind = static_cast<VitalKind>(tag);
    r.value = dec.get_i64();
    r.timestamp = dec.get_u64();
    return r;
}

}  // namespace medchain
