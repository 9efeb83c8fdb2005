#include "medchain/contract.hpp"

#include <cmath>
#include <stdexcept>

namespace medchain {

namespace {

// Model inputs are clamped to +/-10^9 milliunits (10^6 units) so variance
// stays inside i64 with 128-bit intermediates.
constexpr Milli kModelClamp = 1'000'000'000;

Milli clamp_model_input(Milli x) {
    if (x > kModelClamp) return kModelClamp;
    if (x < -kModelClamp) return -kModelClamp;
    return x;
}

// Round half away from zero; denominator positive.
std::int64_t rdiv(__int128 num, std::int64_t den) {
    __int128 half = den / 2;
    __int128 q = num >= 0 ? (num + half) / den : (num - half) / den;
    return static_cast<std::int64_t>(q);
}

// Floor integer square root.
std::int64_t isqrt(std::int64_t v) {
    if (v <= 0) return 0;
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
    while (r > 0 && static_cast<__int128>(r) * r > v) --r;
    while (static_cast<__int128>(r + 1) * (r + 1) <= v) ++r;
    return r;
}

}  // namespace

std::string_view role_name(Role role) {
    switch (role) {
        case Role::Hospital: return "hospital";
        case Role::Doctor: return "doctor";
        case Role::Patient: return "patient";
        case Role::Device: return "device";
    }
    return "unknown";
}

std::string_view reject_reason_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::Plausibility: return "plausibility";
        case RejectReason::AccessDenied: return "access_denied";
        case RejectReason::UnknownIdentity: return "unknown_identity";
        case RejectReason::Malformed: return "malformed";
    }
    return "unknown";
}

std::map<VitalKind, VitalBounds> ContractParams::default_vital_bounds() {
    // Physiologic outer envelopes, inclusive, in milliunits.
    return {
        {VitalKind::HeartRate, {25'000, 250'000}},    // bpm
        {VitalKind::SpO2, {50'000, 100'000}},         // percent
        {VitalKind::Temperature, {30'000, 45'000}},   // degrees C
        {VitalKind::SystolicBP, {60'000, 250'000}},   // mmHg
        {VitalKind::DiastolicBP, {30'000, 150'000}},  // mmHg
        {VitalKind::Glucose, {20'000, 600'000}},      // mg/dL
    };
}

std::optional<Role> ContractState::role_of(const NodeId& id) const {
    auto it = registry.find(id);
    if (it == registry.end()) return std::nullopt;
    return it->second;
}

bool validate_vitals(const TelemetryReading& reading, const ContractParams& params) {
    auto it = params.bounds.find(reading.vital_kind);
    if (it == params.bounds.end()) throw std::invalid_argument("unsupported vital kind");
    return reading.value >= it->second.lo && reading.value <= it->second.hi;
}

DeviceHealthState update_device_model(const DeviceHealthState& prev,
                                      const TelemetryReading& reading,
                                      const ContractParams& params) {
    DeviceHealthState next = prev;
    const Milli x = clamp_model_input(reading.value);
    const bool plausible = validate_vitals(reading, params);

    bool violation = !plausible;
    if (prev.samples_seen == 0) {
        next.ewma_mean = x;
        next.ewma_var = 0;
    } else {
        // The violation test uses the pre-update mean/variance.
        if (!violation && prev.samples_seen > params.warmup) {
            const Milli d = x - prev.ewma_mean;
            const __int128 lhs = static_cast<__int128>(d < 0 ? -d : d) * 1000;
            const __int128 rhs =
                static_cast<__int128>(params.k_milli) * isqrt(prev.ewma_var);
            violation = lhs > rhs;
        }
        const std::int64_t a = params.alpha_milli;
        const Milli d = x - prev.ewma_mean;
        next.ewma_mean = rdiv(static_cast<__int128>(1000 - a) * prev.ewma_mean +
                                  static_cast<__int128>(a) * x,
                              1000);
        next.ewma_var = rdiv(static_cast<__int128>(1000 - a) * prev.ewma_var +
                                 static_cast<__int128>(a) * d * d,
                             1000);
    }
    next.samples_seen = prev.samples_seen + 1;

    if (violation) {
        next.consecutive_violations = prev.consecutive_violations + 1;
        if (next.status != DeviceStatus::Flagged &&
            next.consecutive_violations >= params.flag_after) {
            next.status = DeviceStatus::Flagged;
            next.flagged_at_sample = next.samples_seen;
        } else if (next.status != DeviceStatus::Flagged) {
            next.status = DeviceStatus::Suspect;
        }
    } else {
        next.consecutive_violations = 0;
        if (next.status != DeviceStatus::Flagged) next.status = DeviceStatus::Healthy;
    }
    return next;
}

namespace {

Verdict evaluate_telemetry(const TelemetryTx& tx, const NodeId& submitter,
                           ContractState& state) {
    if (tx.reading.device_id != submitter) return Verdict::reject(RejectReason::Malformed);
    if (state.params.bounds.find(tx.reading.vital_kind) == state.params.bounds.end())
        return Verdict::reject(RejectReason::Malformed);

    // Rejected readings still feed the model: implausible data is exactly the
    // malfunction evidence.
    auto key = std::make_pair(tx.reading.device_id, tx.reading.vital_kind);
    DeviceHealthState& slot = state.device_health[key];
    slot = update_device_model(slot, tx.reading, state.params);

    return validate_vitals(tx.reading, state.params)
               ? Verdict::accept()
               : Verdict::reject(RejectReason::Plausibility);
}

}  // namespace

std::pair<Verdict, ContractState> evaluate(const Transaction& tx, ContractState state) {
    auto role = state.role_of(tx.submitter);
    if (!role) return {Verdict::reject(RejectReason::UnknownIdentity), std::move(state)};

    Verdict verdict = std::visit(
        [&](const auto& kind) -> Verdict {
            using T = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<T, TelemetryTx>) {
                if (*role != Role::Device) return Verdict::reject(RejectReason::AccessDenied);
                return evaluate_telemetry(kind, tx.submitter, state);
            } else if constexpr (std::is_same_v<T, RecordAnchorTx>) {
                if (*role != Role::Hospital) return Verdict::reject(RejectReason::AccessDenied);
                if (kind.record_id.empty() || kind.replica_locations.empty())
                    return Verdict::reject(RejectReason::Malformed);
                return Verdict::accept();
            } else {
                // Grant and revoke: only the patient themselves or a hospital.
                if (*role == Role::Hospital) return Verdict::accept();
                if (*role == Role::Patient && tx.submitter == kind.patient_id)
                    return Verdict::accept();
                return Verdict::reject(RejectReason::AccessDenied);
            }
        },
        tx.kind);
    return {verdict, std::move(state)};
}

ContractState apply_commit(const Transaction& tx, ContractState state) {
    if (const auto* grant = std::get_if<AccessGrantTx>(&tx.kind)) {
        state.access.grants.insert({grant->patient_id, grant->grantee_id});
    } else if (const auto* revoke = std::get_if<AccessRevokeTx>(&tx.kind)) {
        state.access.grants.erase({revoke->patient_id, revoke->grantee_id});
    }
    return state;
}

std::vector<NodeId> flag_malfunctions(const ContractState& state) {
    std::vector<NodeId> out;
    for (const auto& [key, health] : state.device_health)
        if (health.status == DeviceStatus::Flagged) out.push_back(key.first);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool check_access(const Identity& requester, const std::string& patient_id,
                  const AccessTable& table) {
    switch (requester.role) {
        case Role::Hospital: return true;
        case Role::Patient: return requester.id == patient_id;
        case Role::Doctor: return table.has(patient_id, requester.id);
        case Role::Device: return false;
    }
    return false;
}

}  // namespace medchain
