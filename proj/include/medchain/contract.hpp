#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "medchain/transaction.hpp"

namespace medchain {

enum class Role : std::uint8_t { Hospital, Doctor, Patient, Device };

std::string_view role_name(Role role);

struct Identity {
    NodeId id;
    Role role = Role::Device;
};

/// (patient_id, grantee_id) pairs, derived from committed grant/revoke
/// transactions only, so the table is replayable from the chain alone.
struct AccessTable {
    std::set<std::pair<std::string, std::string>> grants;

    bool has(const std::string& patient_id, const std::string& grantee_id) const {
        return grants.count({patient_id, grantee_id}) > 0;
    }
};

enum class DeviceStatus : std::uint8_t { Healthy, Suspect, Flagged };

/// Streaming statistics for one (device, vital kind) pair. All arithmetic is
/// fixed-point i64 milliunits with round-half-away-from-zero, so replay is
/// bit-exact across platforms.
struct DeviceHealthState {
    Milli ewma_mean = 0;
    Milli ewma_var = 0;  // (milliunits)^2
    std::uint64_t consecutive_violations = 0;
    DeviceStatus status = DeviceStatus::Healthy;
    std::uint64_t samples_seen = 0;
    // samples_seen value at the moment the state became Flagged; 0 while not.
    std::uint64_t flagged_at_sample = 0;

    bool operator==(const DeviceHealthState&) const = default;
};

enum class RejectReason : std::uint8_t { Plausibility, AccessDenied, UnknownIdentity, Malformed };

std::string_view reject_reason_name(RejectReason reason);

struct Verdict {
    bool accepted = false;
    RejectReason reason = RejectReason::Malformed;

    static Verdict accept() { return {true, RejectReason::Malformed}; }
    static Verdict reject(RejectReason r) { return {false, r}; }
};

/// Inclusive plausibility bounds per vital kind, in milliunits.
struct VitalBounds {
    Milli lo = 0;
    Milli hi = 0;
};

struct ContractParams {
    // EWMA smoothing factor in per-mille (alpha = alpha_milli / 1000).
    std::int64_t alpha_milli = 100;
    // Deviation threshold multiplier in milli (k = k_milli / 1000).
    std::int64_t k_milli = 4000;
    // Consecutive violations that flag a device.
    std::uint64_t flag_after = 5;
    // Samples before the statistical test activates.
    std::uint64_t warmup = 20;
    // Plausibility bounds, indexable by VitalKind.
    std::map<VitalKind, VitalBounds> bounds = default_vital_bounds();

    static std::map<VitalKind, VitalBounds> default_vital_bounds();
};

struct ContractState {
    ContractParams params;
    std::map<NodeId, Role> registry;
    AccessTable access;
    std::map<std::pair<NodeId, VitalKind>, DeviceHealthState> device_health;

    void register_identity(const Identity& who) { registry[who.id] = who.role; }
    std::optional<Role> role_of(const NodeId& id) const;
};

/// True iff the reading's value lies within the inclusive plausibility bounds
/// for its vital kind. Throws std::invalid_argument for an unsupported kind
/// (one with no bounds entry).
bool validate_vitals(const TelemetryReading& reading, const ContractParams& params);

/// One EWMA step for the given reading; returns the updated per-(device,
/// vital) state. Fed by both accepted and plausibility-rejected telemetry.
DeviceHealthState update_device_model(const DeviceHealthState& prev,
                                      const TelemetryReading& reading,
                                      const ContractParams& params);

/// Admission policy for every transaction. Pure: the verdict and next state
/// depend only on (tx, state). Telemetry updates the device model in the next
/// state even when rejected for plausibility; access-table transitions are
/// not made here (they apply at commit, see apply_commit).
std::pair<Verdict, ContractState> evaluate(const Transaction& tx, ContractState state);

/// Commit-time state transition for a transaction that made it into a block:
/// grant/revoke transactions update the access table. Pure.
ContractState apply_commit(const Transaction& tx, ContractState state);

/// Device ids whose status is Flagged for any vital kind, sorted.
std::vector<NodeId> flag_malfunctions(const ContractState& state);

/// Allowed iff requester is a Hospital, the patient themselves, or a Doctor
/// holding a grant for the patient. Devices are never allowed.
bool check_access(const Identity& requester, const std::string& patient_id,
                  const AccessTable& table);

}  // namespace medchain
