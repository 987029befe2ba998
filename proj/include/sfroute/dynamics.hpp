#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "sfroute/graph.hpp"
#include "sfroute/rng.hpp"
#include "sfroute/routing.hpp"

namespace sfroute {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Packet {
    std::uint64_t id = 0;
    NodeId source = 0;
    NodeId destination = 0;
    PathView path;
    std::uint32_t hop_index = 0;  // position of the node currently holding the packet
    std::int64_t birth_step = 0;
};

struct StepCounts {
    std::int64_t injected = 0;
    std::int64_t delivered = 0;
};

/// Synchronous packet dynamics with unit service time and unbounded FIFO
/// queues. One call to step() performs, at every node: collect the packets
/// forwarded to it during the previous step, inject a new packet with
/// probability gamma, append the arrivals and the new packet to the queue as
/// a randomly permuted sub-queue, then forward the head of the queue one hop
/// along its route. A packet forwarded to its destination leaves the system
/// in that step.
class Simulator {
public:
    static constexpr std::int64_t kMaxLivePackets = 10'000'000;

    Simulator(const Graph& g, const RouteTable& routes, std::uint64_t seed);

    StepCounts step(double gamma);

    // Appends a fresh packet to the tail of source's queue, bypassing the
    // Bernoulli injection. Counted as injected.
    void place_packet(NodeId source, NodeId destination);

    std::int64_t step_count() const { return step_; }
    std::int64_t live_packets() const { return live_; }
    std::int64_t injected_total() const { return injected_total_; }
    std::int64_t delivered_total() const { return delivered_total_; }

    // Packets held by v: its queue plus arrivals not yet merged into it.
    std::size_t queue_length(NodeId v) const { return queues_[v].size() + inbox_[v].size(); }
    // Queue contents in service order, followed by unmerged arrivals.
    std::vector<Packet> queue_contents(NodeId v) const;

    using DeliveryObserver = std::function<void(const Packet&, std::int64_t step)>;
    void on_delivery(DeliveryObserver observer) { on_delivery_ = std::move(observer); }

private:
    std::uint32_t allocate(const Packet& p);

    const Graph* g_;
    const RouteTable* routes_;
    Rng rng_;
    std::vector<Packet> pool_;
    std::vector<std::uint32_t> free_;
    std::vector<std::deque<std::uint32_t>> queues_;
    std::vector<std::vector<std::uint32_t>> inbox_;
    std::vector<std::uint32_t> scratch_;
    std::int64_t step_ = 0;
    std::int64_t live_ = 0;
    std::int64_t injected_total_ = 0;
    std::int64_t delivered_total_ = 0;
    std::uint64_t next_id_ = 0;
    DeliveryObserver on_delivery_;
};

struct SimulationParams {
    std::int64_t t_warm = 1000;
    std::int64_t t_meas = 5000;
    bool record_series = false;
};

struct ThetaEstimate {
    double gamma = 0.0;
    double theta = 0.0;
    std::int64_t t_warm = 0;
    std::int64_t t_meas = 0;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> n_series;  // n(t) for t = 0..t_warm+t_meas when recorded
};

struct TraceRow {
    std::int64_t step;
    std::int64_t n;
    std::int64_t injected;
    std::int64_t delivered;
};

// theta = [n(t_warm + t_meas) - n(t_warm)] / (N gamma t_meas); zero for gamma = 0.
ThetaEstimate run_simulation(const Graph& g, const RouteTable& routes, double gamma, const SimulationParams& params,
                             std::uint64_t seed, const std::function<void(const TraceRow&)>& trace = {});

struct ThresholdParams {
    double epsilon = 0.02;
    double gamma_lo = 0.0;
    double gamma_hi = 1.0;
    double width = 0.01;
    int replicates = 3;
    SimulationParams sim;
    std::uint64_t seed = 0;
};

// Bisection on the congestion predicate theta > epsilon, decided by majority
// over replicate seeds at each probe.
double find_threshold(const Graph& g, const RouteTable& routes, const ThresholdParams& params);

void write_trace_header(std::ostream& out);
void write_trace_row(const TraceRow& row, std::ostream& out);

}  // namespace sfroute
