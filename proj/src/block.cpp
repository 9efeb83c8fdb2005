#include "medchain/block.hpp"

namespace medchain {

Digest256 block_header_hash(const Block& b) {
    Encoder enc;
    enc.put_u64(b.height);
    enc.put_digest(b.prev_hash);
    enc.put_u64(b.timestamp);
    enc.put_digest(b.tx_root);
    enc.put_string(b.validator);
    return hash_bytes(enc.bytes());
}

Digest256 block_tx_root(const std::vector<Transaction>& txs) {
    std::vector<Digest256> leaves;
    leaves.reserve(txs.size());
    for (const auto& tx : txs) leaves.push_back(tx_digest(tx));
    return merkle_root(leaves);
}

CanonicalBytes encode_block(const Block& b) {
    Encoder enc;
    enc.put_u64(b.height);
    enc.put_digest(b.prev_hash);
    enc.put_u64(b.timestamp);
    enc.put_digest(b.tx_root);
    enc.put_string(b.validator);
    enc.put_count(b.txs.size());
    for (const auto& tx : b.txs)
        for (auto byte : encode_tx(tx)) enc.put_u8(byte);
    enc.put_digest(b.block_hash);
    return enc.take();
}

Block decode_block(std::span<const std::uint8_t> bytes) {
    Decoder dec(bytes);
    Block b;
    b.height = dec.get_u64();
    b.prev_hash = dec.get_digest();
    b.timestamp = dec.get_u64();
    b.tx_root = dec.get_digest();
    b.validator = dec.get_string();
    std::uint32_t n = dec.get_count();
    b.txs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) b.txs.push_back(decode_tx(dec));
    b.block_hash = dec.get_digest();
    dec.expect_done();
    return b;
}

}  // namespace medchain
