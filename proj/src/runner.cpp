#include "medchain/runner.hpp"

#include <stdexcept>

namespace medchain {

Digest256 state_root_of(const std::vector<Block>& blocks) {
    std::map<NodeId, std::uint64_t> nonces;
    std::set<std::pair<std::string, std::string>> grants;
    for (const auto& b : blocks) {
        for (const auto& tx : b.txs) {
            auto& top = nonces[tx.submitter];
            if (tx.nonce > top) top = tx.nonce;
            if (const auto* grant = std::get_if<AccessGrantTx>(&tx.kind))
                grants.insert({grant->patient_id, grant->grantee_id});
            else if (const auto* revoke = std::get_if<AccessRevokeTx>(&tx.kind))
                grants.erase({revoke->patient_id, revoke->grantee_id});
        }
    }
    Encoder enc;
    enc.put_digest(blocks.back().block_hash);
    enc.put_count(nonces.size());
    for (const auto& [submitter, nonce] : nonces) {
        enc.put_string(submitter);
        enc.put_u64(nonce);
    }
    enc.put_count(grants.size());
    for (const auto& [patient, grantee] : grants) {
        enc.put_string(patient);
        enc.put_string(grantee);
    }
    return hash_bytes(enc.bytes());
}

std::vector<TxTiming> telemetry_timings(const std::vector<Block>& blocks) {
    std::vector<TxTiming> out;
    for (const auto& b : blocks)
        for (const auto& tx : b.txs)
            if (std::holds_alternative<TelemetryTx>(tx.kind))
                out.push_back({tx.submitter, tx.submit_time, b.timestamp});
    return out;
}

Scenario::Scenario(RunConfig config, std::filesystem::path records_dir, bool tracing)
    : config_(std::move(config)), records_dir_(std::move(records_dir)) {
    sim_ = std::make_unique<Simulation>(config_.net);
    sim_->set_handler(this);
    sim_->set_tracing(tracing);

    fleet_ = default_fleet(config_.device_count, config_.seed);
    for (auto& p : fleet_) p.sample_period = config_.sample_period;

    ContractState contract;
    contract.params = config_.contract;
    contract.register_identity({hospital_id(), Role::Hospital});
    contract.register_identity({"doctor-1", Role::Doctor});
    contract.register_identity({"doctor-2", Role::Doctor});
    for (const auto& p : fleet_) {
        contract.register_identity({p.device_id, Role::Device});
        contract.register_identity({p.patient_id, Role::Patient});
    }

    chain_ = std::make_unique<Chain>(std::vector<NodeId>{hospital_id()}, 0,
                                     config_.ledger, std::move(contract));

    std::vector<NodeId> storage;
    for (std::size_t i = 0; i < config_.storage_nodes; ++i)
        storage.push_back("storage-" + std::to_string(i + 1));
    store_ = std::make_unique<RecordStore>(records_dir_, storage, config_.replication,
                                           hospital_id(), *chain_);
    store_->set_reachability(
        [this](const NodeId& node) { return sim_->connected(hospital_id(), node); });

    sim_->register_endpoint(hospital_id());
    sim_->register_endpoint("doctor-1");
    sim_->register_endpoint("doctor-2");
    for (const auto& node : storage) sim_->register_endpoint(node);
    for (const auto& p : fleet_) {
        sim_->register_endpoint(p.device_id);
        sim_->register_endpoint(p.patient_id);
        devices_[p.device_id] = nullptr;  // built in run(), after faults are known
        samples_taken_[p.device_id] = 0;
    }
    telemetry_csv_ = "timestamp,device_id,vital_kind,value_milli\n";
}

Scenario::~Scenario() = default;

std::optional<Identity> Scenario::identity_of(const NodeId& id) const {
    auto role = chain_->contract().role_of(id);
    if (!role) return std::nullopt;
    return Identity{id, *role};
}

void Scenario::inject_fault(const NodeId& device_id, const FaultSpec& fault) {
    if (devices_.find(device_id) == devices_.end())
        throw std::invalid_argument("unknown device " + device_id);
    faults_[device_id] = fault;
}

void Scenario::seed_records_and_grants() {
    // Hospital-local work at tick 0: every patient's record is placed and
    // anchored before telemetry starts flowing.
    for (const auto& p : fleet_) {
        PatientRecord record;
        record.patient_id = p.patient_id;
        record.patient_name = "Patient " + p.patient_id.substr(p.patient_id.rfind('-') + 1);
        record.disease_history = {"hypertension"};
        record.medicines_prescribed = {"amlodipine 5mg"};
        PutResult put = store_->put_record(record, 0);
        if (!put.ok()) throw std::runtime_error("seed record rejected");
    }

    // patient-1 grants doctor-1 read access; travels like any transaction.
    Transaction grant;
    grant.kind = AccessGrantTx{"patient-1", "doctor-1"};
    grant.submitter = "patient-1";
    grant.submit_time = 0;
    grant.nonce = 1;
    sim_->send(grant, "patient-1", hospital_id());
}

void Scenario::on_sample(const NodeId& device, Ticks now) {
    auto it = devices_.find(device);
    if (it == devices_.end() || !it->second) return;
    DeviceSimulator& dev = *it->second;

    --outstanding_samples_;
    std::size_t& taken = samples_taken_[device];
    if (sample_cap_ && taken >= *sample_cap_) return;
    ++taken;

    if (auto tx = dev.sample_tx(now)) {
        const auto& reading = std::get<TelemetryTx>(tx->kind).reading;
        telemetry_csv_ += std::to_string(reading.timestamp) + ',' + reading.device_id + ',' +
                          std::string(vital_kind_name(reading.vital_kind)) + ',' +
                          std::to_string(reading.value) + '\n';
        sim_->send(*tx, device, hospital_id());
    }

    Ticks next = now + dev.profile().sample_period;
    bool more = sample_cap_ ? taken < *sample_cap_ : next < config_.duration;
    if (more) {
        sim_->schedule_sample(next, device);
        ++outstanding_samples_;
    }
}

void Scenario::on_deliver(const Transaction& msg, const NodeId& /*from*/,
                          const NodeId& to, Ticks /*now*/) {
    if (to != hospital_id()) return;

    // Track freshly flagged (device, vital) pairs for the events file.
    const TelemetryTx* telemetry = std::get_if<TelemetryTx>(&msg.kind);
    DeviceStatus before = DeviceStatus::Healthy;
    if (telemetry) {
        auto key = std::make_pair(telemetry->reading.device_id, telemetry->reading.vital_kind);
        auto it = chain_->contract().device_health.find(key);
        if (it != chain_->contract().device_health.end()) before = it->second.status;
    }

    chain_->submit(msg);

    if (telemetry && before != DeviceStatus::Flagged) {
        auto key = std::make_pair(telemetry->reading.device_id, telemetry->reading.vital_kind);
        auto it = chain_->contract().device_health.find(key);
        if (it != chain_->contract().device_health.end() &&
            it->second.status == DeviceStatus::Flagged) {
            flag_events_.push_back({sim_->now(), key.first, key.second,
                                    it->second.flagged_at_sample});
        }
    }
}

void Scenario::on_form_block(Ticks now) {
    if (chain_->form_block(now)) sim_->note_block_formed();

    const bool sampling_done = outstanding_samples_ == 0;
    const bool drained = chain_->pending_count() == 0 && sim_->stats().in_flight == 0;
    if (!(sampling_done && drained))
        sim_->schedule_form_block(now + config_.ledger.block_interval);
}

ScenarioResult Scenario::run() {
    sample_cap_.reset();
    for (const auto& p : fleet_) {
        auto fault_it = faults_.find(p.device_id);
        devices_[p.device_id] = std::make_unique<DeviceSimulator>(
            p, fault_it != faults_.end() ? fault_it->second : std::nullopt);
    }

    seed_records_and_grants();
    for (const auto& p : fleet_) {
        if (config_.duration > 0) {
            sim_->schedule_sample(0, p.device_id);
            ++outstanding_samples_;
        }
    }
    sim_->schedule_form_block(config_.ledger.block_interval);

    const Ticks horizon = config_.duration + 1000 * config_.ledger.block_interval;
    sim_->run_until(horizon);
    if (chain_->pending_count() != 0)
        throw std::runtime_error("simulation did not drain (pending transactions left)");
    return finish();
}

ScenarioResult Scenario::run_batch(std::size_t samples_per_device) {
    sample_cap_ = samples_per_device;
    for (const auto& p : fleet_) {
        auto fault_it = faults_.find(p.device_id);
        devices_[p.device_id] = std::make_unique<DeviceSimulator>(
            p, fault_it != faults_.end() ? fault_it->second : std::nullopt);
    }

    if (samples_per_device > 0) {
        for (const auto& p : fleet_) {
            sim_->schedule_sample(0, p.device_id);
            ++outstanding_samples_;
        }
    }
    sim_->schedule_form_block(config_.ledger.block_interval);

    const Ticks horizon = (static_cast<Ticks>(samples_per_device) + 2) * config_.sample_period +
                          1000 * config_.ledger.block_interval;
    sim_->run_until(horizon);
    if (chain_->pending_count() != 0)
        throw std::runtime_error("simulation did not drain (pending transactions left)");
    return finish();
}

ScenarioResult Scenario::finish() {
    ScenarioResult result;
    result.state_root = chain_->state_root();
    result.flagged = flag_malfunctions(chain_->contract());
    result.flag_events = flag_events_;
    result.net = sim_->stats();
    result.committed_txs = chain_->committed_tx_count();
    result.rejected_txs = chain_->audit_log().size();
    result.chain_height = chain_->height();
    result.trace_jsonl = trace_to_jsonl(sim_->trace());
    result.trace_digest = hash_bytes(result.trace_jsonl);
    return result;
}

}  // namespace medchain
