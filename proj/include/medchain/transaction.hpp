#pragma once

#include <string>
#include <variant>
#include <vector>

#include "medchain/telemetry.hpp"

namespace medchain {

using NodeId = std::string;

struct TelemetryTx {
    TelemetryReading reading;
    bool operator==(const TelemetryTx&) const = default;
};

/// Commits an off-chain record payload to the chain: replicas are later
/// verified against payload_digest.
struct RecordAnchorTx {
    std::string record_id;
    Digest256 payload_digest;
    std::vector<NodeId> replica_locations;
    bool operator==(const RecordAnchorTx&) const = default;
};

struct AccessGrantTx {
    std::string patient_id;
    std::string grantee_id;
    bool operator==(const AccessGrantTx&) const = default;
};

struct AccessRevokeTx {
    std::string patient_id;
    std::string grantee_id;
    bool operator==(const AccessRevokeTx&) const = default;
};

using TxKind = std::variant<TelemetryTx, RecordAnchorTx, AccessGrantTx, AccessRevokeTx>;

struct Transaction {
    TxKind kind;
    NodeId submitter;
    Ticks submit_time = 0;
    std::uint64_t nonce = 0;

    bool operator==(const Transaction&) const = default;
};

CanonicalBytes encode_tx(const Transaction& tx);
Transaction decode_tx(Decoder& dec);

/// Leaf digest used for the block Merkle tree.
Digest256 tx_digest(const Transaction& tx);

}  // namespace medchain
