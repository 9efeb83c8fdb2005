#include "medchain/simnet.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace medchain {

Simulation::Simulation(NetConfig config)
    : config_(std::move(config)), rng_(derive_seed(config_.seed, "simnet")) {}

const LinkModel& Simulation::link_for(const NodeId& from, const NodeId& to) const {
    auto it = config_.link_overrides.find({from, to});
    return it != config_.link_overrides.end() ? it->second : config_.default_link;
}

Ticks Simulation::sample_latency(const LinkModel& link) {
    return std::visit(
        [&](const auto& model) -> Ticks {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, FixedLatency>) {
                return model.value;
            } else if constexpr (std::is_same_v<T, UniformLatency>) {
                return model.lo + rng_.next_u64() % (model.hi - model.lo + 1);
            } else {
                double v = model.mean + model.sigma * rng_.next_gaussian();
                if (v < 0.0) v = 0.0;
                return static_cast<Ticks>(std::llround(v));
            }
        },
        link.latency);
}

std::uint64_t Simulation::push(Ticks due,
                               std::variant<DeliverEv, SampleEv, FormBlockEv> kind) {
    if (due < now_) throw std::invalid_argument("scheduling in the past");
    std::uint64_t seq = next_seq_++;
    queue_.push(Event{due, seq, std::move(kind)});
    return seq;
}

void Simulation::schedule_sample(Ticks due, const NodeId& device) {
    push(due, SampleEv{device});
}

void Simulation::schedule_form_block(Ticks due) {
    push(due, FormBlockEv{});
}

void Simulation::send(const Transaction& msg, const NodeId& from, const NodeId& to) {
    if (!endpoint_registered(from) || !endpoint_registered(to))
        throw std::invalid_argument("unknown endpoint");
    ++stats_.sends;
    if (!connected(from, to)) {
        ++stats_.dropped;
        log(now_, "drop", from, to, next_seq_++);
        return;
    }
    const LinkModel& link = link_for(from, to);
    if (link.loss_probability > 0.0 && rng_.next_unit() < link.loss_probability) {
        ++stats_.dropped;
        log(now_, "drop", from, to, next_seq_++);
        return;
    }
    Ticks due = now_ + sample_latency(link);
    ++stats_.in_flight;
    push(due, DeliverEv{msg, from, to});
}

SimStats Simulation::run_until(Ticks t_end) {
    while (!queue_.empty() && queue_.top().due <= t_end) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.due;
        std::visit(
            [&](auto& kind) {
                using T = std::decay_t<decltype(kind)>;
                if constexpr (std::is_same_v<T, DeliverEv>) {
                    ++stats_.delivered;
                    --stats_.in_flight;
                    log(now_, "deliver", kind.from, kind.to, ev.seq);
                    if (handler_) handler_->on_deliver(kind.msg, kind.from, kind.to, now_);
                } else if constexpr (std::is_same_v<T, SampleEv>) {
                    log(now_, "sample", kind.device, {}, ev.seq);
                    if (handler_) handler_->on_sample(kind.device, now_);
                } else {
                    log(now_, "form_block", {}, {}, ev.seq);
                    if (handler_) handler_->on_form_block(now_);
                }
            },
            ev.kind);
    }
    if (t_end > now_) now_ = t_end;
    return stats_;
}

void Simulation::partition(const std::vector<NodeId>& group_a,
                           const std::vector<NodeId>& group_b) {
    std::set<NodeId> a(group_a.begin(), group_a.end());
    std::set<NodeId> b(group_b.begin(), group_b.end());
    for (const auto& id : a)
        if (b.count(id) > 0) throw std::invalid_argument("overlapping partition groups");
    part_a_ = std::move(a);
    part_b_ = std::move(b);
}

void Simulation::heal() {
    part_a_.clear();
    part_b_.clear();
}

bool Simulation::connected(const NodeId& a, const NodeId& b) const {
    if (part_a_.empty() && part_b_.empty()) return true;
    const bool a_in_a = part_a_.count(a) > 0, a_in_b = part_b_.count(a) > 0;
    const bool b_in_a = part_a_.count(b) > 0, b_in_b = part_b_.count(b) > 0;
    return !((a_in_a && b_in_b) || (a_in_b && b_in_a));
}

void Simulation::log(Ticks t, std::string kind, NodeId from, NodeId to, std::uint64_t seq) {
    if (!tracing_) return;
    trace_.push_back(TraceEntry{t, std::move(kind), std::move(from), std::move(to), seq});
}

std::string trace_to_jsonl(const std::vector<TraceEntry>& trace) {
    std::ostringstream out;
    for (const auto& e : trace) {
        nlohmann::json j;
        j["t"] = e.t;
        j["kind"] = e.kind;
        j["from"] = e.from;
        j["to"] = e.to;
        j["seq"] = e.seq;
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace medchain
