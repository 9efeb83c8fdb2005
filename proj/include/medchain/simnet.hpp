#pragma once

#include <map>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "medchain/device_sim.hpp"
#include "medchain/transaction.hpp"

namespace medchain {

struct FixedLatency {
    Ticks value = 0;
};
struct UniformLatency {
    Ticks lo = 0;
    Ticks hi = 0;  // inclusive
};
struct NormalLatency {
    double mean = 0.0;
    double sigma = 0.0;  // truncated at 0
};

struct LinkModel {
    std::variant<FixedLatency, UniformLatency, NormalLatency> latency =
        NormalLatency{120.0, 30.0};
    double loss_probability = 0.0;
};

struct NetConfig {
    LinkModel default_link;
    std::map<std::pair<NodeId, NodeId>, LinkModel> link_overrides;
    std::uint64_t seed = 0;
};

struct SimStats {
    std::uint64_t sends = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t in_flight = 0;
    std::uint64_t blocks_formed = 0;
};

struct TraceEntry {
    Ticks t = 0;
    std::string kind;
    NodeId from;
    NodeId to;
    std::uint64_t seq = 0;
};

/// Node logic invoked by dispatched events. The event loop is strictly
/// single-threaded; handlers run inside the dispatch.
class SimHandler {
public:
    virtual ~SimHandler() = default;
    virtual void on_sample(const NodeId& /*device*/, Ticks /*now*/) {}
    virtual void on_deliver(const Transaction& /*msg*/, const NodeId& /*from*/,
                            const NodeId& /*to*/, Ticks /*now*/) {}
    virtual void on_form_block(Ticks /*now*/) {}
};

/// Deterministic discrete-event network. Events dispatch in (due, seq) order;
/// all latency and loss draws come from the config's seed stream, so an
/// identical (config, seed) pair replays an identical dispatch log.
class Simulation {
public:
    explicit Simulation(NetConfig config);

    void set_handler(SimHandler* handler) { handler_ = handler; }
    void register_endpoint(const NodeId& id) { endpoints_.insert(id); }
    bool endpoint_registered(const NodeId& id) const { return endpoints_.count(id) > 0; }

    Ticks now() const { return now_; }

    /// Throws std::invalid_argument when due < now (scheduling in the past).
    void schedule_sample(Ticks due, const NodeId& device);
    void schedule_form_block(Ticks due);

    /// Queues the message towards `to`. Drops happen at send time: a
    /// partition drop consumes no randomness, a lossy link consumes one
    /// uniform; otherwise one latency sample schedules the delivery.
    void send(const Transaction& msg, const NodeId& from, const NodeId& to);

    /// Dispatches every event with due <= t_end in order; never moves time
    /// backward.
    SimStats run_until(Ticks t_end);

    bool idle() const { return queue_.empty(); }

    void partition(const std::vector<NodeId>& group_a, const std::vector<NodeId>& group_b);
    void heal();
    /// True unless a partition separates a and b.
    bool connected(const NodeId& a, const NodeId& b) const;

    void note_block_formed() { ++stats_.blocks_formed; }

    void set_tracing(bool on) { tracing_ = on; }
    const std::vector<TraceEntry>& trace() const { return trace_; }
    const SimStats& stats() const { return stats_; }

private:
    struct DeliverEv {
        Transaction msg;
        NodeId from;
        NodeId to;
    };
    struct SampleEv {
        NodeId device;
    };
    struct FormBlockEv {};

    struct Event {
        Ticks due = 0;
        std::uint64_t seq = 0;
        std::variant<DeliverEv, SampleEv, FormBlockEv> kind;
    };
    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            if (a.due != b.due) return a.due > b.due;
            return a.seq > b.seq;
        }
    };

    const LinkModel& link_for(const NodeId& from, const NodeId& to) const;
    Ticks sample_latency(const LinkModel& link);
    std::uint64_t push(Ticks due, std::variant<DeliverEv, SampleEv, FormBlockEv> kind);
    void log(Ticks t, std::string kind, NodeId from, NodeId to, std::uint64_t seq);

    NetConfig config_;
    SplitMix64 rng_;
    SimHandler* handler_ = nullptr;
    std::set<NodeId> endpoints_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    Ticks now_ = 0;
    std::uint64_t next_seq_ = 0;
    SimStats stats_;
    bool tracing_ = false;
    std::vector<TraceEntry> trace_;
    std::set<NodeId> part_a_;
    std::set<NodeId> part_b_;
};

/// JSON-lines form of the dispatch log; its digest is the determinism
/// witness.
std::string trace_to_jsonl(const std::vector<TraceEntry>& trace);

}  // namespace medchain
