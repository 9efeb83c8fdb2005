#include "medchain/records.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace medchain {

CanonicalBytes encode_record(const PatientRecord& r) {
    Encoder enc;
    enc.put_string(r.patient_id);
    enc.put_string(r.patient_name);
    enc.put_count(r.disease_history.size());
    for (const auto& s : r.disease_history) enc.put_string(s);
    enc.put_count(r.medicines_prescribed.size());
    for (const auto& s : r.medicines_prescribed) enc.put_string(s);
    return enc.take();
}

PatientRecord decode_record(std::span<const std::uint8_t> bytes) {
    Decoder dec(bytes);
    PatientRecord r;
    r.patient_id = dec.get_string();
    r.patient_name = dec.get_string();
    std::uint32_t nd = dec.get_count();
    for (std::uint32_t i = 0; i < nd; ++i) r.disease_history.push_back(dec.get_string());
    std::uint32_t nm = dec.get_count();
    for (std::uint32_t i = 0; i < nm; ++i) r.medicines_prescribed.push_back(dec.get_string());
    dec.expect_done();
    return r;
}

Digest256 record_digest(const PatientRecord& r) {
    return hash_bytes(encode_record(r));
}

std::string record_owner(const std::string& record_id) {
    return record_id.substr(0, record_id.find('@'));
}

std::string_view fetch_status_name(FetchStatus status) {
    switch (status) {
        case FetchStatus::Ok: return "ok";
        case FetchStatus::AccessDenied: return "access_denied";
        case FetchStatus::NotFound: return "not_found";
        case FetchStatus::AllReplicasCorrupt: return "all_replicas_corrupt";
        case FetchStatus::AllReplicasUnreachable: return "all_replicas_unreachable";
    }
    return "unknown";
}

std::vector<NodeId> rendezvous_placement(const std::string& record_id,
                                         std::vector<NodeId> nodes, std::size_t count) {
    std::vector<std::pair<Digest256, NodeId>> scored;
    scored.reserve(nodes.size());
    for (auto& node : nodes) {
        Encoder enc;
        enc.put_string(record_id);
        enc.put_string(node);
        scored.emplace_back(hash_bytes(enc.bytes()), std::move(node));
    }
    // Highest score wins; node id breaks (practically impossible) ties.
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<NodeId> out;
    out.reserve(std::min(count, scored.size()));
    for (std::size_t i = 0; i < scored.size() && i < count; ++i)
        out.push_back(std::move(scored[i].second));
    return out;
}

RecordStore::RecordStore(std::filesystem::path data_dir, std::vector<NodeId> nodes,
                         std::size_t replication, NodeId hospital_id, Chain& chain)
    : data_dir_(std::move(data_dir)),
      nodes_(std::move(nodes)),
      replication_(replication),
      hospital_id_(std::move(hospital_id)),
      chain_(chain) {
    if (replication_ == 0) throw std::invalid_argument("replication factor is zero");
    for (const auto& node : nodes_) online_[node] = true;
}

std::filesystem::path RecordStore::replica_path(const NodeId& node,
                                                const std::string& record_id) const {
    return data_dir_ / node / record_id;
}

bool RecordStore::usable(const NodeId& node) const {
    auto it = online_.find(node);
    if (it == online_.end() || !it->second) return false;
    return !reachable_ || reachable_(node);
}

PutResult RecordStore::put_record(const PatientRecord& record, Ticks now) {
    return put_record(record, record.patient_id, now);
}

PutResult RecordStore::put_record(const PatientRecord& record, const std::string& record_id,
                                  Ticks now) {
    if (record.patient_id.empty()) throw std::invalid_argument("empty patient_id");
    if (record_id.empty() || record_id.find('/') != std::string::npos ||
        record_id.find("..") != std::string::npos)
        throw std::invalid_argument("bad record_id");
    if (record_owner(record_id) != record.patient_id)
        throw std::invalid_argument("record_id does not belong to the record's patient");

    if (staged_.count(record_id) > 0 || chain_.find_anchor(record_id))
        return {PutStatus::DuplicateRecordId, {}};

    if (replication_ > nodes_.size()) return {PutStatus::InsufficientReplicas, {}};
    auto placement = rendezvous_placement(record_id, nodes_, replication_);
    for (const auto& node : placement)
        if (!usable(node)) return {PutStatus::InsufficientReplicas, {}};

    CanonicalBytes payload = encode_record(record);
    RecordAnchor anchor{record_id, hash_bytes(payload), placement, 0};

    Transaction tx;
    tx.kind = RecordAnchorTx{anchor.record_id, anchor.payload_digest, anchor.replica_locations};
    tx.submitter = hospital_id_;
    tx.submit_time = now;
    tx.nonce = next_nonce_++;
    SubmitResult submitted = chain_.submit(tx);
    if (!submitted.accepted()) return {PutStatus::PolicyRejected, {}};

    for (const auto& node : placement) {
        auto path = replica_path(node, record_id);
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
        if (!out) throw std::runtime_error("failed to write replica " + path.string());
    }
    staged_.insert(record_id);
    return {PutStatus::Ok, std::move(anchor)};
}

namespace {
std::optional<CanonicalBytes> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    CanonicalBytes bytes((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    return bytes;
}
}  // namespace

FetchResult RecordStore::get_record(const std::string& record_id,
                                    const Identity& requester) const {
    ++access_checks_;
    if (!check_access(requester, record_owner(record_id), chain_.contract().access))
        return {FetchStatus::AccessDenied, {}};

    auto anchor = chain_.find_anchor(record_id);
    if (!anchor) return {FetchStatus::NotFound, {}};

    bool read_any = false;
    for (const auto& node : anchor->replica_locations) {
        if (!usable(node)) continue;
        auto bytes = read_file(replica_path(node, record_id));
        if (!bytes) continue;  // vanished replica: counts as unreachable
        ++replica_reads_;
        read_any = true;
        if (hash_bytes(*bytes) != anchor->payload_digest) continue;
        try {
            return {FetchStatus::Ok, decode_record(*bytes)};
        } catch (const DecodeError&) {
            continue;  // digest collision cannot happen; treat as corrupt
        }
    }
    return {read_any ? FetchStatus::AllReplicasCorrupt : FetchStatus::AllReplicasUnreachable, {}};
}

std::optional<IntegrityReport> RecordStore::verify_record(const std::string& record_id) const {
    auto anchor = chain_.find_anchor(record_id);
    if (!anchor) return std::nullopt;

    IntegrityReport report;
    for (const auto& node : anchor->replica_locations) {
        if (!usable(node)) continue;
        auto bytes = read_file(replica_path(node, record_id));
        if (!bytes) continue;
        ++report.replicas_checked;
        if (hash_bytes(*bytes) == anchor->payload_digest)
            ++report.replicas_matching;
        else
            report.failing_replicas.push_back(node);
    }
    report.ok = report.replicas_matching > 0;
    return report;
}

void RecordStore::take_node_offline(const NodeId& node) {
    auto it = online_.find(node);
    if (it == online_.end()) throw std::invalid_argument("unknown storage node " + node);
    it->second = false;
}

void RecordStore::bring_node_online(const NodeId& node) {
    auto it = online_.find(node);
    if (it == online_.end()) throw std::invalid_argument("unknown storage node " + node);
    it->second = true;
}

bool RecordStore::node_online(const NodeId& node) const {
    auto it = online_.find(node);
    return it != online_.end() && it->second;
}

}  // namespace medchain
