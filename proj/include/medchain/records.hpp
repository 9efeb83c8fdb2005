#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medchain/chain.hpp"

namespace medchain {

/// The hospital-layer record. Payloads are stored as canonical bytes,
/// unencrypted; confidentiality is enforced by access control only.
struct PatientRecord {
    std::string patient_id;
    std::string patient_name;
    std::vector<std::string> disease_history;
    std::vector<std::string> medicines_prescribed;

    bool operator==(const PatientRecord&) const = default;
};

CanonicalBytes encode_record(const PatientRecord& r);
PatientRecord decode_record(std::span<const std::uint8_t> bytes);
Digest256 record_digest(const PatientRecord& r);

/// Records are immutable; an update is a new "<patient_id>@<version>"
/// record_id. The owner is everything before the first '@'.
std::string record_owner(const std::string& record_id);

/// Replica holders ranked by rendezvous (highest-random-weight) score
/// hash(record_id, node_id); a pure function of the inputs.
std::vector<NodeId> rendezvous_placement(const std::string& record_id,
                                         std::vector<NodeId> nodes, std::size_t count);

struct IntegrityReport {
    bool ok = false;
    std::size_t replicas_checked = 0;
    std::size_t replicas_matching = 0;
    std::vector<NodeId> failing_replicas;
};

enum class PutStatus : std::uint8_t {
    Ok,
    InsufficientReplicas,
    DuplicateRecordId,
    PolicyRejected,
};

struct PutResult {
    PutStatus status = PutStatus::Ok;
    RecordAnchor anchor;  // anchored_height is 0 until the anchor tx commits

    bool ok() const { return status == PutStatus::Ok; }
};

enum class FetchStatus : std::uint8_t {
    Ok,
    AccessDenied,
    NotFound,
    AllReplicasCorrupt,
    AllReplicasUnreachable,
};

std::string_view fetch_status_name(FetchStatus status);

struct FetchResult {
    FetchStatus status = FetchStatus::NotFound;
    PatientRecord record;  // valid when status == Ok

    bool ok() const { return status == FetchStatus::Ok; }
};

/// Replicated record store. One file per (node, record_id) under the data
/// directory; file bytes are exactly the canonical record encoding. Anchor
/// lookups and integrity checks always defer to the chain.
class RecordStore {
public:
    RecordStore(std::filesystem::path data_dir, std::vector<NodeId> nodes,
                std::size_t replication, NodeId hospital_id, Chain& chain);

    /// Places the payload on the rendezvous-chosen replicas and submits the
    /// anchor transaction (hospital-submitted; the store allocates those
    /// nonces). The anchor is committed at the next block boundary.
    PutResult put_record(const PatientRecord& record, Ticks now);
    PutResult put_record(const PatientRecord& record, const std::string& record_id,
                         Ticks now);

    /// Access check first (exactly once, before any replica read), then
    /// replicas are tried in anchor order until one matches the on-chain
    /// digest.
    FetchResult get_record(const std::string& record_id, const Identity& requester) const;

    /// Checks every replica against the anchor. Offline or unreachable
    /// replicas count as unchecked, not failing.
    std::optional<IntegrityReport> verify_record(const std::string& record_id) const;

    void take_node_offline(const NodeId& node);
    void bring_node_online(const NodeId& node);
    bool node_online(const NodeId& node) const;

    /// Extra reachability gate (e.g. a network partition); composed with the
    /// online flag.
    void set_reachability(std::function<bool(const NodeId&)> fn) { reachable_ = std::move(fn); }

    const std::vector<NodeId>& nodes() const { return nodes_; }
    std::filesystem::path replica_path(const NodeId& node, const std::string& record_id) const;

    // Instrumentation for the no-bypass property.
    std::uint64_t access_checks() const { return access_checks_; }
    std::uint64_t replica_reads() const { return replica_reads_; }

private:
    bool usable(const NodeId& node) const;

    std::filesystem::path data_dir_;
    std::vector<NodeId> nodes_;
    std::size_t replication_;
    NodeId hospital_id_;
    Chain& chain_;
    std::map<NodeId, bool> online_;
    std::function<bool(const NodeId&)> reachable_;
    std::set<std::string> staged_;  // ids with a submitted, not yet committed anchor
    std::uint64_t next_nonce_ = 1;
    mutable std::uint64_t access_checks_ = 0;
    mutable std::uint64_t replica_reads_ = 0;
};

}  // namespace medchain
