#include <doctest.h>

#include <cmath>

#include "medchain/contract.hpp"
#include "medchain/device_sim.hpp"

using namespace medchain;

namespace {

DeviceProfile quiet_profile(Milli baseline = 72'000) {
    DeviceProfile p;
    p.device_id = "device-1";
    p.patient_id = "patient-1";
    p.vital_kind = VitalKind::HeartRate;
    p.baseline = baseline;
    p.diurnal_amplitude = 0;
    p.noise_sigma = 0;
    p.sample_period = 400;
    p.seed = 1;
    return p;
}

}  // namespace

TEST_CASE("degenerate generator emits the exact baseline") {
    DeviceSimulator sim(quiet_profile(), std::nullopt);
    for (Ticks t = 0; t < 4000; t += 400) {
        auto r = sim.sample(t);
        REQUIRE(r);
        CHECK(r->value == 72'000);
        CHECK(r->timestamp == t);
    }
}

TEST_CASE("sampling off the grid is a precondition violation") {
    DeviceSimulator sim(quiet_profile(), std::nullopt);
    CHECK_THROWS_AS(sim.sample(401), std::invalid_argument);
}

TEST_CASE("stuck-at fault replaces every value from onset") {
    FaultSpec fault{StuckAtFault{0}, 0};
    DeviceSimulator sim(quiet_profile(), fault);
    for (Ticks t = 0; t < 4000; t += 400) CHECK(sim.sample(t)->value == 0);
}

TEST_CASE("no faulted value appears before onset") {
    DeviceProfile p = quiet_profile();
    p.noise_sigma = 1'500;
    FaultSpec fault{StuckAtFault{0}, 2'000};

    DeviceSimulator healthy(p, std::nullopt);
    DeviceSimulator faulted(p, fault);
    for (Ticks t = 0; t < 2'000; t += 400)
        CHECK(healthy.sample(t)->value == faulted.sample(t)->value);
    CHECK(faulted.sample(2'000)->value == 0);
}

TEST_CASE("drift adds rate per faulted sample") {
    FaultSpec fault{DriftFault{250}, 800};
    DeviceSimulator sim(quiet_profile(), fault);
    CHECK(sim.sample(0)->value == 72'000);
    CHECK(sim.sample(400)->value == 72'000);
    CHECK(sim.sample(800)->value == 72'250);
    CHECK(sim.sample(1200)->value == 72'500);
    CHECK(sim.sample(1600)->value == 72'750);
}

TEST_CASE("seeded trace statistics match the profile") {
    DeviceProfile p = quiet_profile();
    p.noise_sigma = 1'500;
    p.seed = derive_seed(7, 0);
    DeviceSimulator sim(p, std::nullopt);

    double sum = 0.0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(sim.sample(400 * static_cast<Ticks>(i))->value);
    double mean = sum / n;
    double band = 3.0 * 1'500 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - 72'000.0) <= band);
}

TEST_CASE("run_device emits one transaction per sample instant") {
    DeviceProfile p = quiet_profile();
    auto txs = run_device(p, std::nullopt, 10 * p.sample_period);
    REQUIRE(txs.size() == 10);
    for (std::size_t i = 0; i < txs.size(); ++i) {
        CHECK(txs[i].nonce == i + 1);
        CHECK(txs[i].submit_time == i * p.sample_period);
        CHECK(txs[i].submitter == "device-1");
        const auto& reading = std::get<TelemetryTx>(txs[i].kind).reading;
        CHECK(reading.timestamp == txs[i].submit_time);
    }
}

TEST_CASE("dropout suppresses emissions") {
    DeviceProfile p = quiet_profile();

    SUBCASE("dropout of 1.0 emits nothing") {
        FaultSpec fault{DropoutFault{1.0}, 0};
        CHECK(run_device(p, fault, 100 * p.sample_period).empty());
    }

    SUBCASE("dropout of 0.5 lands in the binomial band") {
        FaultSpec fault{DropoutFault{0.5}, 0};
        auto txs = run_device(p, fault, 10'000 * p.sample_period);
        // 4-sigma band around 5000, sigma = sqrt(10000 * 0.25) = 50.
        CHECK(txs.size() >= 4'800);
        CHECK(txs.size() <= 5'200);
        // Nonces stay consecutive even when samples are dropped.
        for (std::size_t i = 0; i < txs.size(); ++i) CHECK(txs[i].nonce == i + 1);
    }
}

TEST_CASE("a (profile, fault, seed) triple replays bit-identically") {
    DeviceProfile p = quiet_profile();
    p.noise_sigma = 1'500;
    p.diurnal_amplitude = 3'000;
    FaultSpec fault{NoiseBurstFault{5.0}, 4'000};

    auto a = run_device(p, fault, 500 * p.sample_period);
    auto b = run_device(p, fault, 500 * p.sample_period);
    CHECK(a == b);

    p.seed ^= 1;
    auto c = run_device(p, fault, 500 * p.sample_period);
    CHECK(a != c);
}

TEST_CASE("default fleet rotates vitals and derives distinct seeds") {
    auto fleet = default_fleet(4, 42);
    REQUIRE(fleet.size() == 4);
    CHECK(fleet[0].device_id == "device-1");
    CHECK(fleet[3].device_id == "device-4");
    CHECK(fleet[0].vital_kind == VitalKind::HeartRate);
    CHECK(fleet[1].vital_kind == VitalKind::SpO2);
    CHECK(fleet[2].vital_kind == VitalKind::Temperature);
    CHECK(fleet[3].vital_kind == VitalKind::SystolicBP);
    CHECK(fleet[0].seed != fleet[1].seed);

    CHECK(default_fleet(4, 42) == std::vector<DeviceProfile>(fleet));

    auto other = default_fleet(4, 43);
    DeviceSimulator a(fleet[0], std::nullopt), b(other[0], std::nullopt);
    CHECK(a.sample(0)->value != b.sample(0)->value);
}

TEST_CASE("healthy traces stay within the plausibility bounds") {
    ContractParams params;
    auto fleet = default_fleet(4, 42);
    std::size_t total = 0, passed = 0;
    for (const auto& p : fleet) {
        DeviceSimulator sim(p, std::nullopt);
        for (int i = 0; i < 2'500; ++i) {
            auto r = sim.sample(static_cast<Ticks>(i) * p.sample_period);
            ++total;
            if (validate_vitals(*r, params)) ++passed;
        }
    }
    CHECK(static_cast<double>(passed) >= 0.999 * static_cast<double>(total));
}
