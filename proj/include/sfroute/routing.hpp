#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sfroute/graph.hpp"

namespace sfroute {

class RoutingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Protocol { shortest_path, hub_avoidance };

std::string_view protocol_name(Protocol p);  // "SP" / "HA"
Protocol parse_protocol(std::string_view name);

struct RouteSpec {
    Protocol protocol = Protocol::shortest_path;
    double ha_fraction = 0.01;
    std::uint64_t seed = 0;

    friend bool operator==(const RouteSpec&, const RouteSpec&) = default;
};

// Number of hubs removed by hub avoidance: max(1, floor(fraction * n)) for a
// positive fraction, zero otherwise.
NodeId hub_removal_count(NodeId n, double fraction);

// The hubs removed by hub avoidance, highest degree first, equal degrees by
// ascending id.
std::vector<NodeId> hub_removal_set(const Graph& g, double fraction);

// A stored path seen in either direction.
class PathView {
public:
    PathView() = default;
    PathView(const NodeId* data, std::uint32_t size, bool reversed) : data_(data), size_(size), reversed_(reversed) {}

    std::uint32_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    NodeId operator[](std::uint32_t i) const { return reversed_ ? data_[size_ - 1 - i] : data_[i]; }
    NodeId front() const { return (*this)[0]; }
    NodeId back() const { return (*this)[size_ - 1]; }
    std::vector<NodeId> to_vector() const;

private:
    const NodeId* data_ = nullptr;
    std::uint32_t size_ = 0;
    bool reversed_ = false;
};

// One node path per unordered pair, stored oriented from the smaller id.
// path(d, s) is path(s, d) read backwards, so reverse symmetry holds by
// construction.
class RouteTable {
public:
    NodeId node_count() const { return n_; }
    const RouteSpec& spec() const { return spec_; }
    const std::vector<NodeId>& removed_nodes() const { return removed_; }

    bool has_path(NodeId s, NodeId d) const;
    // Throws RoutingError for s == d or a missing pair.
    PathView path(NodeId s, NodeId d) const;

    // First unassigned ordered pair, if any.
    std::optional<Edge> missing_pair() const;

    friend bool operator==(const RouteTable&, const RouteTable&) = default;

private:
    friend class RouteTableBuilder;
    friend RouteTable build_routes(const Graph& g, const RouteSpec& spec);
    std::size_t pair_index(NodeId s, NodeId d) const;

    NodeId n_ = 0;
    RouteSpec spec_;
    std::vector<NodeId> removed_;
    std::vector<std::uint64_t> offsets_;
    std::vector<NodeId> nodes_;
};

class RouteTableBuilder {
public:
    RouteTableBuilder(NodeId n, RouteSpec spec, std::vector<NodeId> removed = {});

    // path runs from s to d; reverse symmetry is enforced by storing it once.
    void set_path(NodeId s, NodeId d, std::span<const NodeId> path);
    RouteTable build() &&;

private:
    RouteTable table_;
    std::vector<std::vector<NodeId>> paths_;
};

// Per-source route generation shared by table construction and streamed
// betweenness. Sources are independent: each draws from a stream derived
// from (seed, source).
class RouteSampler {
public:
    RouteSampler(const Graph& g, const RouteSpec& spec);

    using Visitor = std::function<void(NodeId destination, std::span<const NodeId> path)>;
    // Visits the route to every destination d > source in increasing order.
    void for_each_from(NodeId source, const Visitor& visit) const;

    const std::vector<NodeId>& removed_nodes() const { return removed_; }

private:
    const Graph* g_;
    RouteSpec spec_;
    std::vector<NodeId> removed_;
    std::vector<char> is_removed_;
};

RouteTable build_routes(const Graph& g, const RouteSpec& spec);
RouteTable shortest_path_routes(const Graph& g, std::uint64_t seed);
RouteTable hub_avoidance_routes(const Graph& g, double fraction, std::uint64_t seed);

// Structural check of every path against the graph: endpoints, adjacency,
// no repeated node. Returns an empty string when the table is sound.
std::string validate_routes(const Graph& g, const RouteTable& routes);

struct BetweennessReport {
    NodeId node_count = 0;
    std::vector<std::int64_t> counts;  // ordered-pair routes with v strictly interior
    std::int64_t max_betweenness = 0;
    NodeId argmax = 0;  // smallest id attaining the maximum

    static BetweennessReport from_counts(std::vector<std::int64_t> counts);
};

BetweennessReport route_betweenness(const RouteTable& routes);

// Same counts as route_betweenness(build_routes(g, spec)) without
// materializing the table. Sources are split across `workers` threads.
BetweennessReport streamed_betweenness(const Graph& g, const RouteSpec& spec, int workers = 1);

enum class PredictionMode { paper, exact };

// paper: min(1, (N-1)/B). exact: min(1, (N-1)/(B + N - 1)), which also counts
// the bottleneck's own injections.
double predict_gamma_c(const BetweennessReport& report, PredictionMode mode);

void write_betweenness_csv(const BetweennessReport& report, const RouteSpec& spec, std::ostream& out);
void write_route_dump(const RouteTable& routes, std::ostream& out);

}  // namespace sfroute
