#include "medchain/transaction.hpp"

namespace medchain {

namespace {
// Variant tags, fixed by the encoding table.
constexpr std::uint8_t kTagTelemetry = 0;
constexpr std::uint8_t kTagRecordAnchor = 1;
constexpr std::uint8_t kTagAccessGrant = 2;
constexpr std::uint8_t kTagAccessRevoke = 3;
}  // namespace

CanonicalBytes encode_tx(const Transaction& tx) {
    Encoder enc;
    std::visit(
        [&](const auto& kind) {
            using T = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<T, TelemetryTx>) {
                enc.put_u8(kTagTelemetry);
                encode(enc, kind.reading);
            } else if constexpr (std::is_same_v<T, RecordAnchorTx>) {
                enc.put_u8(kTagRecordAnchor);
                enc.put_string(kind.record_id);
                enc.put_digest(kind.payload_digest);
                enc.put_count(kind.replica_locations.size());
                for (const auto& node : kind.replica_locations) enc.put_string(node);
            } else if constexpr (std::is_same_v<T, AccessGrantTx>) {
                enc.put_u8(kTagAccessGrant);
                enc.put_string(kind.patient_id);
                enc.put_string(kind.grantee_id);
            } else {
                enc.put_u8(kTagAccessRevoke);
                enc.put_string(kind.patient_id);
                enc.put_string(kind.grantee_id);
            }
        },
        tx.kind);
    enc.put_string(tx.submitter);
    enc.put_u64(tx.submit_time);
    enc.put_u64(tx.nonce);
    return enc.take();
}

Transaction decode_tx(Decoder& dec) {
    Transaction tx;
    std::uint8_t tag = dec.get_u8();
    switch (tag) {
        case kTagTelemetry:
            tx.kind = TelemetryTx{decode_reading(dec)};
            break;
        case kTagRecordAnchor: {
            RecordAnchorTx a;
            a.record_id = dec.get_string();
            a.payload_digest = dec.get_digest();
            std::uint32_t n = dec.get_count();
            a.replica_locations.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) a.replica_locations.push_back(dec.get_string());
            tx.kind = std::move(a);
            break;
        }
        case kTagAccessGrant: {
            AccessGrantTx g;
            g.patient_id = dec.get_string();
            g.grantee_id = dec.get_string();
            tx.kind = g;
            break;
        }
        case kTagAccessRevoke: {
            AccessRevokeTx r;
            r.patient_id = dec.get_string();
            r.grantee_id = dec.get_string();
            tx.kind = r;
            break;
        }
        default:
            throw DecodeError("bad transaction tag");
    }
    tx.submitter = dec.get_string();
    tx.submit_time = dec.get_u64();
    tx.nonce = dec.get_u64();
    return tx;
}

Digest256 tx_digest(const Transaction& tx) {
    return hash_bytes(encode_tx(tx));
}

}  // namespace medchain
