#include "medchain/chain.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace medchain {

std::string_view chain_fault_name(ChainFault fault) {
    switch (fault) {
        case ChainFault::None: return "none";
        case ChainFault::HashMismatch: return "hash-mismatch";
        case ChainFault::MerkleMismatch: return "merkle-mismatch";
        case ChainFault::LinkMismatch: return "link-mismatch";
        case ChainFault::HeightMismatch: return "height-mismatch";
        case ChainFault::BadGenesis: return "bad-genesis";
        case ChainFault::Malformed: return "malformed";
    }
    return "unknown";
}

Chain::Chain(std::vector<NodeId> validators, Ticks genesis_time, LedgerParams params,
             ContractState contract)
    : validators_(std::move(validators)),
      params_(params),
      contract_(std::move(contract)) {
    if (validators_.empty()) throw std::invalid_argument("validator set is empty");
    if (params_.block_interval == 0) throw std::invalid_argument("block_interval is zero");
    if (params_.max_block_txs == 0) throw std::invalid_argument("max_block_txs is zero");

    Block genesis;
    genesis.height = 0;
    genesis.prev_hash = Digest256{};
    genesis.timestamp = genesis_time;
    genesis.tx_root = block_tx_root({});
    genesis.validator = validators_.front();
    genesis.block_hash = block_header_hash(genesis);
    blocks_.push_back(std::move(genesis));
}

SubmitResult Chain::submit(const Transaction& tx) {
    auto& seen = seen_nonces_[tx.submitter];
    if (seen.count(tx.nonce) > 0) {
        audit_.push_back({tx.submit_time, tx.submitter, tx.nonce, "duplicate_nonce"});
        return {SubmitStatus::DuplicateNonce, RejectReason::Malformed};
    }

    auto [verdict, next] = evaluate(tx, std::move(contract_));
    contract_ = std::move(next);
    if (!verdict.accepted) {
        audit_.push_back({tx.submit_time, tx.submitter, tx.nonce,
                          std::string(reject_reason_name(verdict.reason))});
        return {SubmitStatus::PolicyRejected, verdict.reason};
    }

    seen.insert(tx.nonce);
    pending_.push_back(tx);
    return {SubmitStatus::Accepted, RejectReason::Malformed};
}

std::optional<Block> Chain::form_block(Ticks now) {
    if (pending_.empty() || now % params_.block_interval != 0) return std::nullopt;

    Block b;
    b.height = blocks_.back().height + 1;
    b.prev_hash = blocks_.back().block_hash;
    b.timestamp = now;
    b.validator = validators_[b.height % validators_.size()];

    std::size_t take = std::min(params_.max_block_txs, pending_.size());
    b.txs.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        b.txs.push_back(std::move(pending_.front()));
        pending_.pop_front();
    }
    b.tx_root = block_tx_root(b.txs);
    b.block_hash = block_header_hash(b);

    for (const auto& tx : b.txs) {
        contract_ = apply_commit(tx, std::move(contract_));
        auto& top = committed_nonce_[tx.submitter];
        if (tx.nonce > top) top = tx.nonce;
        if (const auto* anchor = std::get_if<RecordAnchorTx>(&tx.kind)) {
            anchors_[anchor->record_id] = RecordAnchor{
                anchor->record_id, anchor->payload_digest, anchor->replica_locations,
                b.height};
        }
    }
    committed_txs_ += b.txs.size();

    blocks_.push_back(b);
    return b;
}

ChainValidation Chain::validate() const {
    return validate_blocks(blocks_);
}

Digest256 Chain::state_root() const {
    Encoder enc;
    enc.put_digest(blocks_.back().block_hash);
    enc.put_count(committed_nonce_.size());
    for (const auto& [submitter, nonce] : committed_nonce_) {
        enc.put_string(submitter);
        enc.put_u64(nonce);
    }
    enc.put_count(contract_.access.grants.size());
    for (const auto& [patient, grantee] : contract_.access.grants) {
        enc.put_string(patient);
        enc.put_string(grantee);
    }
    return hash_bytes(enc.bytes());
}

std::optional<RecordAnchor> Chain::find_anchor(const std::string& record_id) const {
    auto it = anchors_.find(record_id);
    if (it == anchors_.end()) return std::nullopt;
    return it->second;
}

void Chain::export_blocks(std::ostream& out) const {
    for (const auto& b : blocks_) out << hex_encode(encode_block(b)) << '\n';
}

ChainValidation validate_blocks(const std::vector<Block>& blocks) {
    if (blocks.empty()) return {false, 0, ChainFault::BadGenesis};

    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        const auto pos = static_cast<std::uint64_t>(i);
        if (b.height != pos) return {false, pos, ChainFault::HeightMismatch};
        if (i == 0) {
            if (!b.prev_hash.is_zero()) return {false, 0, ChainFault::BadGenesis};
        } else if (b.prev_hash != blocks[i - 1].block_hash) {
            return {false, pos, ChainFault::LinkMismatch};
        }
        if (block_tx_root(b.txs) != b.tx_root) return {false, pos, ChainFault::MerkleMismatch};
        if (block_header_hash(b) != b.block_hash) return {false, pos, ChainFault::HashMismatch};
    }
    return {true, 0, ChainFault::None};
}

ImportResult import_blocks(std::istream& in) {
    ImportResult result;
    std::string line;
    std::uint64_t pos = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto raw = hex_decode(line);
        if (!raw) {
            result.validation = {false, pos, ChainFault::Malformed};
            return result;
        }
        try {
            result.blocks.push_back(decode_block(*raw));
        } catch (const DecodeError&) {
            result.validation = {false, pos, ChainFault::Malformed};
            return result;
        }
        ++pos;
    }
    result.validation = validate_blocks(result.blocks);
    return result;
}

ContractState replay_chain(const std::vector<Block>& blocks, ContractState base) {
    for (const auto& b : blocks) {
        for (const auto& tx : b.txs) {
            auto [verdict, next] = evaluate(tx, std::move(base));
            base = std::move(next);
            base = apply_commit(tx, std::move(base));
        }
    }
    return base;
}

}  // namespace medchain
