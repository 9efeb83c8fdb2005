#pragma once

#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "medchain/block.hpp"
#include "medchain/contract.hpp"

namespace medchain {

struct LedgerParams {
    Ticks block_interval = 1000;
    std::size_t max_block_txs = 16;
};

enum class SubmitStatus : std::uint8_t { Accepted, DuplicateNonce, PolicyRejected };

struct SubmitResult {
    SubmitStatus status = SubmitStatus::Accepted;
    RejectReason reason = RejectReason::Malformed;  // valid when PolicyRejected

    bool accepted() const { return status == SubmitStatus::Accepted; }
};

struct RejectionRecord {
    Ticks time = 0;
    NodeId submitter;
    std::uint64_t nonce = 0;
    std::string reason;
};

enum class ChainFault : std::uint8_t {
    None,
    HashMismatch,
    MerkleMismatch,
    LinkMismatch,
    HeightMismatch,
    BadGenesis,
    Malformed,
};

std::string_view chain_fault_name(ChainFault fault);

struct ChainValidation {
    bool ok = true;
    std::uint64_t failing_height = 0;  // valid when !ok
    ChainFault fault = ChainFault::None;
};

/// On-chain record anchor, indexed from committed RecordAnchorTx.
struct RecordAnchor {
    std::string record_id;
    Digest256 payload_digest;
    std::vector<NodeId> replica_locations;
    std::uint64_t anchored_height = 0;
};

/// Permissioned hash-linked ledger with rotating proof-of-authority.
/// Single-writer: submissions and block formation go through one owner
/// context; const queries may run concurrently between writes.
class Chain {
public:
    /// Deterministic genesis: height 0, zero prev_hash, no transactions,
    /// validator = first of the set. Throws std::invalid_argument when
    /// validators is empty.
    Chain(std::vector<NodeId> validators, Ticks genesis_time, LedgerParams params,
          ContractState contract);

    /// Policy-checks then queues the transaction. Rejections never enter the
    /// queue; they are appended to the audit log instead.
    SubmitResult submit(const Transaction& tx);

    /// Forms the next block when now lands on a block boundary and
    /// transactions are pending. FIFO drain of at most max_block_txs.
    std::optional<Block> form_block(Ticks now);

    /// Recomputes every block hash, Merkle root, and linkage.
    ChainValidation validate() const;

    /// Digest of (last block hash, per-submitter committed-nonce table,
    /// access-grant table); the determinism witness.
    Digest256 state_root() const;

    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& last_block() const { return blocks_.back(); }
    std::uint64_t height() const { return blocks_.back().height; }
    std::size_t pending_count() const { return pending_.size(); }
    std::size_t committed_tx_count() const { return committed_txs_; }

    const ContractState& contract() const { return contract_; }
    const std::vector<RejectionRecord>& audit_log() const { return audit_; }
    const std::vector<NodeId>& validators() const { return validators_; }
    const LedgerParams& params() const { return params_; }

    std::optional<RecordAnchor> find_anchor(const std::string& record_id) const;

    /// Newline-delimited hex of canonical blocks.
    void export_blocks(std::ostream& out) const;

private:
    std::vector<NodeId> validators_;
    LedgerParams params_;
    ContractState contract_;
    std::vector<Block> blocks_;
    std::deque<Transaction> pending_;
    std::map<NodeId, std::set<std::uint64_t>> seen_nonces_;
    std::map<NodeId, std::uint64_t> committed_nonce_;  // max committed per submitter
    std::map<std::string, RecordAnchor> anchors_;
    std::vector<RejectionRecord> audit_;
    std::size_t committed_txs_ = 0;
};

/// Validates a stand-alone block sequence (as decoded from an export file).
/// Reported heights are positions in the sequence.
ChainValidation validate_blocks(const std::vector<Block>& blocks);

struct ImportResult {
    std::vector<Block> blocks;
    ChainValidation validation;
};

/// Parses a chain export; a malformed line fails at that position with
/// fault = Malformed.
ImportResult import_blocks(std::istream& in);

/// Folds evaluate + apply_commit over every committed transaction, starting
/// from the given base state (identity registry and params, no history).
ContractState replay_chain(const std::vector<Block>& blocks, ContractState base);

}  // namespace medchain
