#include <doctest.h>

#include "medchain/block.hpp"
#include "medchain/merkle.hpp"
#include "test_util.hpp"

using namespace medchain;

TEST_CASE("sha256 matches the published test vectors") {
    // FIPS 180 vectors: empty string and "abc".
    CHECK(hash_bytes(std::string_view{}).hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hash_bytes(std::string_view{"abc"}).hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hash_bytes is deterministic") {
    SplitMix64 rng(7);
    for (int i = 0; i < 32; ++i) {
        std::vector<std::uint8_t> data(rng.next_u64() % 100);
        for (auto& b : data) b = static_cast<std::uint8_t>(rng.next_u64());
        CHECK(hash_bytes(data) == hash_bytes(data));
    }
}

TEST_CASE("hex is strict lowercase") {
    Digest256 d = hash_bytes(std::string_view{"abc"});
    CHECK(d.hex().size() == 64);
    CHECK(Digest256::from_hex(d.hex()) == d);
    std::string upper = d.hex();
    upper[0] = 'B';
    CHECK(!Digest256::from_hex(upper));
    CHECK(!Digest256::from_hex("xyz"));
    CHECK(!Digest256::from_hex(d.hex().substr(1)));
}

TEST_CASE("canonical primitives") {
    Encoder enc;
    enc.put_u64(0);
    CHECK(hex_encode(enc.bytes()) == "0000000000000000");

    Encoder empty_str;
    empty_str.put_string("");
    CHECK(hex_encode(empty_str.bytes()) == "00000000");

    Encoder i64enc;
    i64enc.put_i64(-1);
    CHECK(hex_encode(i64enc.bytes()) == "ffffffffffffffff");
}

namespace {

Transaction sample_telemetry_tx() {
    Transaction tx;
    tx.kind = TelemetryTx{{"device-1", "patient-1", VitalKind::HeartRate, 72000, 400}};
    tx.submitter = "device-1";
    tx.submit_time = 400;
    tx.nonce = 1;
    return tx;
}

}  // namespace

TEST_CASE("sample transaction encodes to the golden bytes") {
    Transaction tx = sample_telemetry_tx();
    CHECK(hex_encode(encode_tx(tx)) == testutil::read_golden_line("sample_tx.hex"));
    CHECK(tx_digest(tx).hex() == testutil::read_golden_line("sample_tx_digest.txt"));
}

TEST_CASE("transaction decode round trip") {
    SplitMix64 rng(11);
    auto random_string = [&](std::size_t max_len) {
        std::string s;
        std::size_t len = rng.next_u64() % (max_len + 1);
        for (std::size_t i = 0; i < len; ++i)
            s.push_back(static_cast<char>('a' + rng.next_u64() % 26));
        return s;
    };
    auto random_tx = [&]() {
        Transaction tx;
        switch (rng.next_u64() % 4) {
            case 0:
                tx.kind = TelemetryTx{{random_string(12), random_string(12),
                                       static_cast<VitalKind>(rng.next_u64() % 6),
                                       static_cast<Milli>(rng.next_u64() % 1000000),
                                       rng.next_u64() % 100000}};
                break;
            case 1: {
                RecordAnchorTx a;
                a.record_id = random_string(12);
                a.payload_digest = hash_bytes(random_string(8));
                for (std::size_t i = 0; i < rng.next_u64() % 4; ++i)
                    a.replica_locations.push_back(random_string(8));
                tx.kind = std::move(a);
                break;
            }
            case 2:
                tx.kind = AccessGrantTx{random_string(10), random_string(10)};
                break;
            default:
                tx.kind = AccessRevokeTx{random_string(10), random_string(10)};
        }
        tx.submitter = random_string(10);
        tx.submit_time = rng.next_u64() % 1000000;
        tx.nonce = rng.next_u64() % 10000;
        return tx;
    };

    for (int i = 0; i < 200; ++i) {
        Transaction tx = random_tx();
        CanonicalBytes bytes = encode_tx(tx);
        Decoder dec(bytes);
        Transaction back = decode_tx(dec);
        dec.expect_done();
        CHECK(back == tx);

        // Injectivity: distinct values encode to distinct bytes.
        Transaction other = random_tx();
        if (!(other == tx)) CHECK(encode_tx(other) != bytes);
    }
}

TEST_CASE("decoder rejects trailing or truncated input") {
    Transaction tx = sample_telemetry_tx();
    CanonicalBytes bytes = encode_tx(tx);

    CanonicalBytes padded = bytes;
    padded.push_back(0);
    Decoder with_pad(padded);
    decode_tx(with_pad);
    CHECK_THROWS_AS(with_pad.expect_done(), DecodeError);

    CanonicalBytes cut(bytes.begin(), bytes.end() - 1);
    Decoder truncated(cut);
    CHECK_THROWS_AS(decode_tx(truncated), DecodeError);
}

TEST_CASE("merkle root rules") {
    CHECK(merkle_root({}) == hash_bytes(std::string_view{}));

    Digest256 leaf = hash_bytes(std::string_view{"leaf"});
    CHECK(merkle_root(std::vector<Digest256>{leaf}) == hash_bytes(leaf.bytes));
}

TEST_CASE("merkle roots for 1..16 leaves match the brute-force oracle") {
    std::istringstream golden(testutil::read_file(testutil::golden_dir() / "merkle_roots.txt"));
    std::vector<Digest256> leaves;
    for (std::uint8_t i = 1; i <= 16; ++i) {
        leaves.push_back(hash_bytes(std::span<const std::uint8_t>(&i, 1)));
        std::string expected;
        REQUIRE(std::getline(golden, expected));
        CHECK(merkle_root(leaves).hex() == expected);
    }
}

TEST_CASE("single byte flips change the block digest") {
    Block b;
    b.height = 3;
    b.prev_hash = hash_bytes(std::string_view{"prev"});
    b.timestamp = 3000;
    b.validator = "hospital-1";
    for (int i = 0; i < 5; ++i) {
        Transaction tx = sample_telemetry_tx();
        tx.nonce = static_cast<std::uint64_t>(i) + 1;
        b.txs.push_back(tx);
    }
    b.tx_root = block_tx_root(b.txs);
    b.block_hash = block_header_hash(b);

    CanonicalBytes bytes = encode_block(b);
    Digest256 base = hash_bytes(bytes);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        CanonicalBytes mutated = bytes;
        mutated[i] ^= 0x01;
        CHECK(hash_bytes(mutated) != base);
    }
}

TEST_CASE("derived per-device seeds match the reference") {
    std::istringstream golden(testutil::read_file(testutil::golden_dir() / "derived_seeds.txt"));
    for (std::uint64_t i = 0; i < 4; ++i) {
        std::string expected;
        REQUIRE(std::getline(golden, expected));
        CHECK(std::to_string(derive_seed(42, i)) == expected);
    }
}
