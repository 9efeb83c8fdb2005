#include <doctest.h>

#include "medchain/contract.hpp"
#include "medchain/device_sim.hpp"

using namespace medchain;

namespace {

ContractState registered_state() {
    ContractState state;
    state.register_identity({"hospital-1", Role::Hospital});
    state.register_identity({"device-1", Role::Device});
    state.register_identity({"device-3", Role::Device});
    state.register_identity({"patient-1", Role::Patient});
    state.register_identity({"patient-2", Role::Patient});
    state.register_identity({"doctor-1", Role::Doctor});
    return state;
}

TelemetryReading reading(Milli value, Ticks t, VitalKind kind = VitalKind::HeartRate,
                         const NodeId& device = "device-1") {
    return {device, "patient-1", kind, value, t};
}

Transaction telemetry_tx(Milli value, Ticks t, std::uint64_t nonce,
                         const NodeId& device = "device-1") {
    Transaction tx;
    tx.kind = TelemetryTx{reading(value, t, VitalKind::HeartRate, device)};
    tx.submitter = device;
    tx.submit_time = t;
    tx.nonce = nonce;
    return tx;
}

}  // namespace

TEST_CASE("plausibility bounds are inclusive") {
    ContractParams params;
    CHECK(validate_vitals(reading(97'000, 0, VitalKind::SpO2), params));
    CHECK(!validate_vitals(reading(80'000, 0, VitalKind::Temperature), params));
    CHECK(validate_vitals(reading(250'000, 0, VitalKind::HeartRate), params));  // at bound
    CHECK(!validate_vitals(reading(250'001, 0, VitalKind::HeartRate), params));
    CHECK(validate_vitals(reading(25'000, 0, VitalKind::HeartRate), params));
    CHECK(!validate_vitals(reading(24'999, 0, VitalKind::HeartRate), params));

    ContractParams no_glucose = params;
    no_glucose.bounds.erase(VitalKind::Glucose);
    CHECK_THROWS_AS(validate_vitals(reading(100'000, 0, VitalKind::Glucose), no_glucose),
                    std::invalid_argument);
}

TEST_CASE("evaluate dispatches by transaction kind and role") {
    ContractState state = registered_state();

    SUBCASE("in-range telemetry from a registered device is accepted") {
        auto [verdict, next] = evaluate(telemetry_tx(72'000, 0, 1), std::move(state));
        CHECK(verdict.accepted);
        CHECK(next.device_health.size() == 1);
    }

    SUBCASE("record anchors are hospital-only") {
        Transaction tx;
        tx.kind = RecordAnchorTx{"patient-1", Digest256{}, {"storage-1"}};
        tx.submitter = "device-1";
        tx.nonce = 1;
        auto [verdict, next] = evaluate(tx, std::move(state));
        CHECK(!verdict.accepted);
        CHECK(verdict.reason == RejectReason::AccessDenied);

        tx.submitter = "hospital-1";
        auto [ok, final] = evaluate(tx, std::move(next));
        CHECK(ok.accepted);
    }

    SUBCASE("unregistered submitter") {
        auto [verdict, next] = evaluate(telemetry_tx(72'000, 0, 1, "device-9"), std::move(state));
        CHECK(!verdict.accepted);
        CHECK(verdict.reason == RejectReason::UnknownIdentity);
    }

    SUBCASE("telemetry claiming another device id is malformed") {
        Transaction tx = telemetry_tx(72'000, 0, 1);
        std::get<TelemetryTx>(tx.kind).reading.device_id = "device-3";
        auto [verdict, next] = evaluate(tx, std::move(state));
        CHECK(!verdict.accepted);
        CHECK(verdict.reason == RejectReason::Malformed);
    }

    SUBCASE("grants: the patient themselves or a hospital") {
        Transaction grant;
        grant.kind = AccessGrantTx{"patient-1", "doctor-1"};
        grant.nonce = 1;

        grant.submitter = "patient-1";
        CHECK(evaluate(grant, registered_state()).first.accepted);
        grant.submitter = "hospital-1";
        CHECK(evaluate(grant, registered_state()).first.accepted);
        grant.submitter = "patient-2";  // someone else's record
        CHECK(evaluate(grant, registered_state()).first.reason == RejectReason::AccessDenied);
        grant.submitter = "doctor-1";
        CHECK(evaluate(grant, registered_state()).first.reason == RejectReason::AccessDenied);
        grant.submitter = "device-1";
        CHECK(evaluate(grant, registered_state()).first.reason == RejectReason::AccessDenied);
    }

    SUBCASE("rejected telemetry still updates the device model") {
        auto [verdict, next] = evaluate(telemetry_tx(0, 0, 1), std::move(state));
        CHECK(!verdict.accepted);
        CHECK(verdict.reason == RejectReason::Plausibility);
        auto it = next.device_health.find({"device-1", VitalKind::HeartRate});
        REQUIRE(it != next.device_health.end());
        CHECK(it->second.samples_seen == 1);
        CHECK(it->second.consecutive_violations == 1);
    }
}

TEST_CASE("EWMA update arithmetic is fixed-point exact") {
    ContractParams params;  // alpha = 0.100

    DeviceHealthState s;
    s = update_device_model(s, reading(72'000, 0), params);
    CHECK(s.ewma_mean == 72'000);
    CHECK(s.ewma_var == 0);
    CHECK(s.samples_seen == 1);
    CHECK(s.status == DeviceStatus::Healthy);

    s = update_device_model(s, reading(73'000, 400), params);
    // m = (900*72000 + 100*73000) / 1000, v = 100 * 1000^2 / 1000
    CHECK(s.ewma_mean == 72'100);
    CHECK(s.ewma_var == 100'000);

    SUBCASE("rounding is half away from zero") {
        DeviceHealthState t;
        t = update_device_model(t, reading(25'001, 0), params);
        t = update_device_model(t, reading(25'016, 400), params);
        // (900*25001 + 100*25016) / 1000 = 25002.5 -> 25003
        CHECK(t.ewma_mean == 25'003);
    }
}

TEST_CASE("constant in-range stream never accumulates violations") {
    ContractParams params;
    DeviceHealthState s;
    for (int i = 0; i < 500; ++i) {
        s = update_device_model(s, reading(72'000, static_cast<Ticks>(i) * 400), params);
        CHECK(s.consecutive_violations == 0);
    }
    CHECK(s.status == DeviceStatus::Healthy);
    CHECK(s.ewma_mean == 72'000);
    CHECK(s.ewma_var == 0);
}

TEST_CASE("stuck-at-zero flags after exactly C consecutive samples") {
    ContractParams params;
    DeviceHealthState s;
    // Healthy warm stream first.
    Ticks t = 0;
    for (int i = 0; i < 50; ++i, t += 400)
        s = update_device_model(s, reading(72'000, t), params);
    CHECK(s.status == DeviceStatus::Healthy);

    std::uint64_t seen_at_fault = s.samples_seen;
    for (std::uint64_t i = 1; i <= params.flag_after; ++i, t += 400) {
        s = update_device_model(s, reading(0, t), params);
        CHECK(s.consecutive_violations == i);
        if (i < params.flag_after)
            CHECK(s.status == DeviceStatus::Suspect);
        else
            CHECK(s.status == DeviceStatus::Flagged);
    }
    CHECK(s.flagged_at_sample == seen_at_fault + params.flag_after);

    // Monotonic: back-to-healthy samples never clear the flag.
    for (int i = 0; i < 20; ++i, t += 400)
        s = update_device_model(s, reading(72'000, t), params);
    CHECK(s.status == DeviceStatus::Flagged);
    CHECK(s.consecutive_violations == 0);
}

TEST_CASE("flag_malfunctions lists flagged devices sorted") {
    ContractState state = registered_state();
    CHECK(flag_malfunctions(state).empty());

    auto flagged = DeviceHealthState{};
    flagged.status = DeviceStatus::Flagged;
    state.device_health[{"device-3", VitalKind::HeartRate}] = flagged;
    state.device_health[{"device-1", VitalKind::SpO2}] = flagged;
    state.device_health[{"device-1", VitalKind::HeartRate}] = DeviceHealthState{};

    auto out = flag_malfunctions(state);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == "device-1");
    CHECK(out[1] == "device-3");
}

TEST_CASE("check_access truth table") {
    AccessTable table;
    table.grants.insert({"patient-1", "doctor-1"});

    CHECK(check_access({"hospital-1", Role::Hospital}, "patient-1", table));
    CHECK(check_access({"patient-1", Role::Patient}, "patient-1", table));
    CHECK(!check_access({"patient-2", Role::Patient}, "patient-1", table));
    CHECK(check_access({"doctor-1", Role::Doctor}, "patient-1", table));
    CHECK(!check_access({"doctor-2", Role::Doctor}, "patient-1", table));
    CHECK(!check_access({"device-1", Role::Device}, "patient-1", table));

    SUBCASE("grant then revoke transitions") {
        ContractState state;
        Transaction grant;
        grant.kind = AccessGrantTx{"patient-2", "doctor-1"};
        state = apply_commit(grant, std::move(state));
        CHECK(check_access({"doctor-1", Role::Doctor}, "patient-2", state.access));

        Transaction revoke;
        revoke.kind = AccessRevokeTx{"patient-2", "doctor-1"};
        state = apply_commit(revoke, std::move(state));
        CHECK(!check_access({"doctor-1", Role::Doctor}, "patient-2", state.access));
    }
}
