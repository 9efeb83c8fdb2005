#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "medchain/config.hpp"
#include "medchain/records.hpp"
#include "medchain/simnet.hpp"

namespace medchain {

/// Recomputes the state root of a block sequence from scratch (last block
/// hash, per-submitter committed-nonce table, access-grant table). For a live
/// chain this always equals Chain::state_root().
Digest256 state_root_of(const std::vector<Block>& blocks);

struct FlagEvent {
    Ticks t = 0;
    NodeId device_id;
    VitalKind vital_kind = VitalKind::HeartRate;
    std::uint64_t flagged_at_sample = 0;
};

struct ScenarioResult {
    Digest256 state_root;
    std::vector<NodeId> flagged;
    std::vector<FlagEvent> flag_events;
    SimStats net;
    std::size_t committed_txs = 0;
    std::size_t rejected_txs = 0;
    std::uint64_t chain_height = 0;
    std::string trace_jsonl;
    Digest256 trace_digest;
};

/// Per-transaction commit timings, scanned from the chain.
struct TxTiming {
    NodeId submitter;
    Ticks submit_time = 0;
    Ticks commit_time = 0;
};

std::vector<TxTiming> telemetry_timings(const std::vector<Block>& blocks);

/// One end-to-end deployment: a hospital validator node, a device fleet
/// feeding telemetry through the network, storage nodes holding anchored
/// patient records, and the policy engine in front of the ledger.
///
/// Fixed identity plan: hospital-1 (validator), device-1..D, patient-1..D,
/// doctor-1 and doctor-2, storage-1..S. Every patient's record is anchored at
/// tick 0 and patient-1 grants doctor-1 read access in the first block.
class Scenario : public SimHandler {
public:
    Scenario(RunConfig config, std::filesystem::path records_dir, bool tracing);
    ~Scenario() override;

    void inject_fault(const NodeId& device_id, const FaultSpec& fault);

    /// Samples every device for the configured duration, then drains: blocks
    /// keep forming until nothing is pending or in flight.
    ScenarioResult run();

    /// Bench mode: every device emits exactly `samples_per_device` readings
    /// (then the scenario drains); record/grant traffic is skipped.
    ScenarioResult run_batch(std::size_t samples_per_device);

    Chain& chain() { return *chain_; }
    RecordStore& store() { return *store_; }
    Simulation& sim() { return *sim_; }
    const RunConfig& config() const { return config_; }
    const std::vector<DeviceProfile>& fleet() const { return fleet_; }

    NodeId hospital_id() const { return "hospital-1"; }
    std::optional<Identity> identity_of(const NodeId& id) const;

    /// Device telemetry actually emitted, as CSV
    /// (timestamp,device_id,vital_kind,value_milli).
    const std::string& telemetry_csv() const { return telemetry_csv_; }

    void on_sample(const NodeId& device, Ticks now) override;
    void on_deliver(const Transaction& msg, const NodeId& from, const NodeId& to,
                    Ticks now) override;
    void on_form_block(Ticks now) override;

private:
    void seed_records_and_grants();
    ScenarioResult finish();

    RunConfig config_;
    std::filesystem::path records_dir_;
    std::unique_ptr<Simulation> sim_;
    std::unique_ptr<Chain> chain_;
    std::unique_ptr<RecordStore> store_;
    std::vector<DeviceProfile> fleet_;
    std::map<NodeId, std::unique_ptr<DeviceSimulator>> devices_;
    std::map<NodeId, std::optional<FaultSpec>> faults_;
    std::map<NodeId, std::size_t> samples_taken_;
    std::optional<std::size_t> sample_cap_;  // per device; bench mode
    std::size_t outstanding_samples_ = 0;
    std::string telemetry_csv_;
    std::vector<FlagEvent> flag_events_;
};

}  // namespace medchain
