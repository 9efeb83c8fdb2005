#include <doctest.h>

#include <fstream>

#include "medchain/records.hpp"
#include "test_util.hpp"

using namespace medchain;

namespace {

ContractState store_contract() {
    ContractState state;
    state.register_identity({"hospital-1", Role::Hospital});
    state.register_identity({"patient-1", Role::Patient});
    state.register_identity({"patient-2", Role::Patient});
    state.register_identity({"doctor-1", Role::Doctor});
    state.register_identity({"device-1", Role::Device});
    return state;
}

std::vector<NodeId> storage_nodes(std::size_t n) {
    std::vector<NodeId> nodes;
    for (std::size_t i = 1; i <= n; ++i) nodes.push_back("storage-" + std::to_string(i));
    return nodes;
}

PatientRecord sample_record(const std::string& patient = "patient-1") {
    PatientRecord r;
    r.patient_id = patient;
    r.patient_name = "Pat";
    r.disease_history = {"hypertension", "diabetes"};
    r.medicines_prescribed = {"amlodipine 5mg"};
    return r;
}

struct Fixture {
    std::filesystem::path dir;
    Chain chain;
    RecordStore store;

    explicit Fixture(std::size_t nodes = 3, std::size_t replication = 3,
                     const std::string& tag = "records")
        : dir(testutil::scratch_dir(tag)),
          chain({"hospital-1"}, 0, {}, store_contract()),
          store(dir, storage_nodes(nodes), replication, "hospital-1", chain) {}

    RecordAnchor put_committed(const PatientRecord& record) {
        PutResult put = store.put_record(record, chain.blocks().back().timestamp);
        REQUIRE(put.ok());
        Ticks boundary = (chain.blocks().back().timestamp / 1000 + 1) * 1000;
        REQUIRE(chain.form_block(boundary));
        auto anchor = chain.find_anchor(put.anchor.record_id);
        REQUIRE(anchor);
        return *anchor;
    }

    void corrupt(const NodeId& node, const std::string& record_id, std::size_t pos = 0) {
        auto path = store.replica_path(node, record_id);
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        REQUIRE(f.good());
        f.seekg(static_cast<std::streamoff>(pos));
        char c = static_cast<char>(f.get());
        f.seekp(static_cast<std::streamoff>(pos));
        f.put(static_cast<char>(c ^ 0x01));
    }
};

}  // namespace

TEST_CASE("record encoding round trips and digests canonically") {
    PatientRecord r = sample_record();
    CanonicalBytes bytes = encode_record(r);
    CHECK(decode_record(bytes) == r);
    CHECK(record_digest(r) == hash_bytes(bytes));

    CHECK(record_owner("patient-1") == "patient-1");
    CHECK(record_owner("patient-1@v2") == "patient-1");
}

TEST_CASE("rendezvous placement matches the reference and is pure") {
    auto nodes = storage_nodes(5);
    auto placement = rendezvous_placement("patient-1", nodes, 3);
    REQUIRE(placement.size() == 3);

    std::string joined = placement[0] + "," + placement[1] + "," + placement[2];
    CHECK(joined == testutil::read_golden_line("rendezvous.txt"));

    // Pure function of (record_id, node set): node order must not matter.
    auto shuffled = nodes;
    std::swap(shuffled[0], shuffled[4]);
    std::swap(shuffled[1], shuffled[3]);
    CHECK(rendezvous_placement("patient-1", shuffled, 3) == placement);

    SplitMix64 rng(5);
    for (int i = 0; i < 50; ++i) {
        std::string id = "patient-" + std::to_string(rng.next_u64() % 1000);
        CHECK(rendezvous_placement(id, nodes, 3) == rendezvous_placement(id, shuffled, 3));
    }
}

TEST_CASE("put_record places replicas and anchors on chain") {
    SUBCASE("R equals node count lists every node") {
        Fixture fx(3, 3, "put3");
        RecordAnchor anchor = fx.put_committed(sample_record());
        REQUIRE(anchor.replica_locations.size() == 3);
        CHECK(anchor.anchored_height == 1);
        CHECK(anchor.payload_digest == record_digest(sample_record()));
        for (const auto& node : fx.store.nodes())
            CHECK(std::filesystem::exists(fx.store.replica_path(node, "patient-1")));
    }

    SUBCASE("5 nodes, R=3 picks the top rendezvous scores") {
        Fixture fx(5, 3, "put5");
        RecordAnchor anchor = fx.put_committed(sample_record());
        CHECK(anchor.replica_locations ==
              rendezvous_placement("patient-1", storage_nodes(5), 3));
    }

    SUBCASE("duplicate record id") {
        Fixture fx(3, 3, "dup");
        fx.put_committed(sample_record());
        CHECK(fx.store.put_record(sample_record(), 1000).status == PutStatus::DuplicateRecordId);
        // A version suffix is a fresh record id.
        CHECK(fx.store.put_record(sample_record(), "patient-1@v2", 1000).ok());
    }

    SUBCASE("offline placement target means insufficient replicas") {
        Fixture fx(3, 3, "offline-put");
        fx.store.take_node_offline("storage-2");
        CHECK(fx.store.put_record(sample_record(), 0).status == PutStatus::InsufficientReplicas);
    }

    SUBCASE("anchor transaction from a non-hospital submitter is rejected on chain") {
        Fixture fx(3, 3, "anchor-role");
        Transaction tx;
        tx.kind = RecordAnchorTx{"patient-1", record_digest(sample_record()), {"storage-1"}};
        tx.submitter = "device-1";
        tx.nonce = 77;
        auto result = fx.chain.submit(tx);
        CHECK(result.status == SubmitStatus::PolicyRejected);
        CHECK(result.reason == RejectReason::AccessDenied);
    }
}

TEST_CASE("get_record mediates access and survives replica corruption") {
    Fixture fx(3, 3, "get");
    fx.put_committed(sample_record());

    Identity owner{"patient-1", Role::Patient};

    SUBCASE("owner reads their own record") {
        FetchResult fetched = fx.store.get_record("patient-1", owner);
        REQUIRE(fetched.ok());
        CHECK(fetched.record == sample_record());
    }

    SUBCASE("one corrupt replica is tolerated") {
        auto anchor = fx.chain.find_anchor("patient-1");
        fx.corrupt(anchor->replica_locations[0], "patient-1");
        CHECK(fx.store.get_record("patient-1", owner).ok());
    }

    SUBCASE("identical corruption everywhere still loses to the chain digest") {
        auto anchor = fx.chain.find_anchor("patient-1");
        for (const auto& node : anchor->replica_locations) fx.corrupt(node, "patient-1", 4);
        CHECK(fx.store.get_record("patient-1", owner).status == FetchStatus::AllReplicasCorrupt);
    }

    SUBCASE("device identities are never allowed") {
        CHECK(fx.store.get_record("patient-1", {"device-1", Role::Device}).status ==
              FetchStatus::AccessDenied);
    }

    SUBCASE("doctor needs a committed grant") {
        Identity doctor{"doctor-1", Role::Doctor};
        CHECK(fx.store.get_record("patient-1", doctor).status == FetchStatus::AccessDenied);

        Transaction grant;
        grant.kind = AccessGrantTx{"patient-1", "doctor-1"};
        grant.submitter = "patient-1";
        grant.submit_time = 1000;
        grant.nonce = 1;
        REQUIRE(fx.chain.submit(grant).accepted());
        CHECK(fx.store.get_record("patient-1", doctor).status == FetchStatus::AccessDenied);
        REQUIRE(fx.chain.form_block(2000));
        CHECK(fx.store.get_record("patient-1", doctor).ok());

        Transaction revoke;
        revoke.kind = AccessRevokeTx{"patient-1", "doctor-1"};
        revoke.submitter = "patient-1";
        revoke.submit_time = 2000;
        revoke.nonce = 2;
        REQUIRE(fx.chain.submit(revoke).accepted());
        REQUIRE(fx.chain.form_block(3000));
        CHECK(fx.store.get_record("patient-1", doctor).status == FetchStatus::AccessDenied);
    }

    SUBCASE("missing record") {
        CHECK(fx.store.get_record("patient-9", {"hospital-1", Role::Hospital}).status ==
              FetchStatus::NotFound);
    }

    SUBCASE("access is checked exactly once, before any replica read") {
        auto checks = fx.store.access_checks();
        auto reads = fx.store.replica_reads();
        CHECK(fx.store.get_record("patient-1", {"device-1", Role::Device}).status ==
              FetchStatus::AccessDenied);
        CHECK(fx.store.access_checks() == checks + 1);
        CHECK(fx.store.replica_reads() == reads);

        CHECK(fx.store.get_record("patient-1", owner).ok());
        CHECK(fx.store.access_checks() == checks + 2);
        CHECK(fx.store.replica_reads() > reads);
    }
}

TEST_CASE("verify_record reports failing replicas by node") {
    Fixture fx(3, 3, "verify");
    fx.put_committed(sample_record());

    auto intact = fx.store.verify_record("patient-1");
    REQUIRE(intact);
    CHECK(intact->ok);
    CHECK(intact->replicas_checked == 3);
    CHECK(intact->replicas_matching == 3);
    CHECK(intact->failing_replicas.empty());

    SUBCASE("corrupt replica is listed; others carry the read") {
        fx.corrupt("storage-2", "patient-1", 7);
        auto report = fx.store.verify_record("patient-1");
        REQUIRE(report);
        CHECK(report->ok);
        CHECK(report->replicas_matching == 2);
        CHECK(report->failing_replicas == std::vector<NodeId>{"storage-2"});
    }

    SUBCASE("all corrupt: the chain digest is the authority") {
        for (const auto& node : storage_nodes(3)) fx.corrupt(node, "patient-1", 2);
        auto report = fx.store.verify_record("patient-1");
        REQUIRE(report);
        CHECK(!report->ok);
        CHECK(report->replicas_matching == 0);
        CHECK(report->failing_replicas.size() == 3);
    }

    SUBCASE("offline nodes are unreachable, not failing") {
        fx.store.take_node_offline("storage-1");
        auto report = fx.store.verify_record("patient-1");
        REQUIRE(report);
        CHECK(report->ok);
        CHECK(report->replicas_checked == 2);
        CHECK(report->failing_replicas.empty());

        fx.store.bring_node_online("storage-1");
        auto restored = fx.store.verify_record("patient-1");
        CHECK(restored->replicas_matching == 3);
    }

    SUBCASE("unknown record") {
        CHECK(!fx.store.verify_record("nobody"));
    }

    SUBCASE("unknown node toggles throw") {
        CHECK_THROWS_AS(fx.store.take_node_offline("storage-99"), std::invalid_argument);
        CHECK_THROWS_AS(fx.store.bring_node_online("storage-99"), std::invalid_argument);
    }
}

TEST_CASE("availability under offline replica holders") {
    Fixture fx(3, 3, "avail");
    fx.put_committed(sample_record());
    Identity owner{"patient-1", Role::Patient};

    for (const auto& node : storage_nodes(3)) {
        fx.store.take_node_offline(node);
        CHECK(fx.store.get_record("patient-1", owner).ok());
        fx.store.bring_node_online(node);
    }

    for (const auto& node : storage_nodes(3)) fx.store.take_node_offline(node);
    CHECK(fx.store.get_record("patient-1", owner).status ==
          FetchStatus::AllReplicasUnreachable);
}

TEST_CASE("anchored integrity: mutated replicas are exactly the failing set") {
    Fixture fx(5, 3, "prop");
    std::vector<std::string> ids;
    for (int i = 1; i <= 4; ++i) {
        PatientRecord r = sample_record("patient-" + std::to_string(i));
        REQUIRE(fx.store.put_record(r, 0).ok());
        ids.push_back(r.patient_id);
    }
    REQUIRE(fx.chain.form_block(1000));

    SplitMix64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const std::string& id = ids[rng.next_u64() % ids.size()];
        auto anchor = fx.chain.find_anchor(id);
        REQUIRE(anchor);
        const auto& replicas = anchor->replica_locations;

        // Mutate a random subset (at least one) at random byte positions.
        std::vector<NodeId> mutated;
        for (const auto& node : replicas)
            if (rng.next_u64() % 2 == 0) mutated.push_back(node);
        if (mutated.empty()) mutated.push_back(replicas[rng.next_u64() % replicas.size()]);

        auto payload_size = std::filesystem::file_size(fx.store.replica_path(replicas[0], id));
        std::vector<std::pair<NodeId, std::size_t>> undo;
        for (const auto& node : mutated) {
            std::size_t pos = rng.next_u64() % payload_size;
            fx.corrupt(node, id, pos);
            undo.emplace_back(node, pos);
        }

        auto report = fx.store.verify_record(id);
        REQUIRE(report);
        std::vector<NodeId> expected = mutated;
        std::sort(expected.begin(), expected.end());
        std::vector<NodeId> failing = report->failing_replicas;
        std::sort(failing.begin(), failing.end());
        CHECK(failing == expected);
        CHECK(report->ok == (mutated.size() < replicas.size()));

        for (const auto& [node, pos] : undo) fx.corrupt(node, id, pos);  // xor restores
        CHECK(fx.store.verify_record(id)->replicas_matching == replicas.size());
    }
}
