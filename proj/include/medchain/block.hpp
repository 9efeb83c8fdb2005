#pragma once

#include <vector>

#include "medchain/merkle.hpp"
#include "medchain/transaction.hpp"

namespace medchain {

struct Block {
    std::uint64_t height = 0;
    Digest256 prev_hash;
    Ticks timestamp = 0;
    Digest256 tx_root;
    NodeId validator;
    std::vector<Transaction> txs;
    Digest256 block_hash;

    bool operator==(const Block&) const = default;
};

/// Digest of the canonical header (height, prev_hash, timestamp, tx_root,
/// validator); this is the block's identity.
Digest256 block_header_hash(const Block& b);

/// Merkle root over the digests of the block's transactions.
Digest256 block_tx_root(const std::vector<Transaction>& txs);

/// Full-block canonical encoding: header fields, transactions, stored hash.
CanonicalBytes encode_block(const Block& b);
Block decode_block(std::span<const std::uint8_t> bytes);

}  // namespace medchain
