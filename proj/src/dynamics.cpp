#include "sfroute/dynamics.hpp"

#include <bit>
#include <ostream>
#include <span>
#include <string>

namespace sfroute {

Simulator::Simulator(const Graph& g, const RouteTable& routes, std::uint64_t seed)
    : g_(&g), routes_(&routes), rng_(seed) {
    if (routes.node_count() != g.node_count()) {
        throw SimulationError("route table size does not match the graph");
    }
    const auto n = static_cast<std::size_t>(g.node_count());
    queues_.resize(n);
    inbox_.resize(n);
}

std::uint32_t Simulator::allocate(const Packet& p) {
    if (live_ >= kMaxLivePackets) {
        throw SimulationError("live packet count reached the abort threshold of " +
                              std::to_string(kMaxLivePackets) + " at step " + std::to_string(step_));
    }
    std::uint32_t slot;
    if (!free_.empty()) {
        slot = free_.back();
        free_.pop_back();
        pool_[slot] = p;
    } else {
        slot = static_cast<std::uint32_t>(pool_.size());
        pool_.push_back(p);
    }
    ++live_;
    return slot;
}

void Simulator::place_packet(NodeId source, NodeId destination) {
    Packet p{next_id_++, source, destination, routes_->path(source, destination), 0, step_};
    queues_[source].push_back(allocate(p));
    ++injected_total_;
}

std::vector<Packet> Simulator::queue_contents(NodeId v) const {
    std::vector<Packet> out;
    for (auto slot : queues_[v]) {
        out.push_back(pool_[slot]);
    }
    for (auto slot : inbox_[v]) {
        out.push_back(pool_[slot]);
    }
    return out;
}

StepCounts Simulator::step(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("injection rate must lie in [0, 1]");
    }
    const NodeId n = g_->node_count();
    StepCounts counts;
    ++step_;

    for (NodeId v = 0; v < n; ++v) {
        scratch_.assign(inbox_[v].begin(), inbox_[v].end());
        inbox_[v].clear();
        if (gamma > 0.0 && bernoulli(rng_, gamma)) {
            auto d = static_cast<NodeId>(uniform_index(rng_, static_cast<std::uint64_t>(n - 1)));
            if (d >= v) {
                ++d;
            }
            scratch_.push_back(allocate({next_id_++, v, d, routes_->path(v, d), 0, step_}));
            ++counts.injected;
        }
        shuffle(std::span(scratch_), rng_);
        queues_[v].insert(queues_[v].end(), scratch_.begin(), scratch_.end());
    }

    for (NodeId v = 0; v < n; ++v) {
        auto& q = queues_[v];
        if (q.empty()) {
            continue;
        }
        const std::uint32_t slot = q.front();
        q.pop_front();
        Packet& p = pool_[slot];
        const NodeId next = p.path[p.hop_index + 1];
        if (p.path[p.hop_index] != v || !g_->has_edge(v, next)) {
            throw std::logic_error("packet " + std::to_string(p.id) + " at node " + std::to_string(v) +
                                   " has non-adjacent next hop " + std::to_string(next));
        }
        ++p.hop_index;
        if (next == p.destination) {
            if (on_delivery_) {
                on_delivery_(p, step_);
            }
            free_.push_back(slot);
            --live_;
            ++counts.delivered;
        } else {
            inbox_[next].push_back(slot);
        }
    }

    injected_total_ += counts.injected;
    delivered_total_ += counts.delivered;
    return counts;
}

ThetaEstimate run_simulation(const Graph& g, const RouteTable& routes, double gamma, const SimulationParams& params,
                             std::uint64_t seed, const std::function<void(const TraceRow&)>& trace) {
    if (params.t_warm < 0 || params.t_meas < 1) {
        throw std::invalid_argument("horizons require t_warm >= 0 and t_meas >= 1");
    }
    ThetaEstimate est;
    est.gamma = gamma;
    est.t_warm = params.t_warm;
    est.t_meas = params.t_meas;
    est.seed = seed;

    Simulator sim(g, routes, seed);
    const std::int64_t horizon = params.t_warm + params.t_meas;
    if (params.record_series) {
        est.n_series.reserve(static_cast<std::size_t>(horizon) + 1);
        est.n_series.push_back(0);
    }
    std::int64_t n_at_warm = 0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
        const StepCounts c = sim.step(gamma);
        if (trace) {
            trace({t, sim.live_packets(), c.injected, c.delivered});
        }
        if (params.record_series) {
            est.n_series.push_back(sim.live_packets());
        }
        if (t == params.t_warm) {
            n_at_warm = sim.live_packets();
        }
    }
    if (gamma > 0.0) {
        est.theta = static_cast<double>(sim.live_packets() - n_at_warm) /
                    (static_cast<double>(g.node_count()) * gamma * static_cast<double>(params.t_meas));
    }
    return est;
}

double find_threshold(const Graph& g, const RouteTable& routes, const ThresholdParams& params) {
    if (!(params.gamma_lo >= 0.0 && params.gamma_lo < params.gamma_hi && params.gamma_hi <= 1.0)) {
        throw std::invalid_argument("threshold search needs 0 <= gamma_lo < gamma_hi <= 1");
    }
    if (params.replicates < 1 || params.width <= 0.0) {
        throw std::invalid_argument("threshold search needs replicates >= 1 and width > 0");
    }

    auto congested = [&](double gamma) {
        int votes = 0;
        for (int r = 0; r < params.replicates; ++r) {
            const auto seed = derive_seed(params.seed, std::bit_cast<std::uint64_t>(gamma),
                                          static_cast<std::uint64_t>(r));
            if (run_simulation(g, routes, gamma, params.sim, seed).theta > params.epsilon) {
                ++votes;
            }
        }
        return 2 * votes > params.replicates;
    };

    double lo = params.gamma_lo;
    double hi = params.gamma_hi;
    if (!congested(hi)) {
        return hi;
    }
    if (lo > 0.0 && congested(lo)) {
        return lo;
    }
    while (hi - lo > params.width) {
        const double mid = 0.5 * (lo + hi);
        if (congested(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void write_trace_header(std::ostream& out) {
    out << "step,n,injected,delivered\n";
}

void write_trace_row(const TraceRow& row, std::ostream& out) {
    out << row.step << "," << row.n << "," << row.injected << "," << row.delivered << "\n";
}

}  // namespace sfroute
