#include "sfroute/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "sfroute/rng.hpp"

namespace sfroute {

std::string_view protocol_name(Protocol p) {
    return p == Protocol::shortest_path ? "SP" : "HA";
}

Protocol parse_protocol(std::string_view name) {
    if (name == "SP" || name == "sp") {
        return Protocol::shortest_path;
    }
    if (name == "HA" || name == "ha") {
        return Protocol::hub_avoidance;
    }
    throw std::invalid_argument("unknown protocol '" + std::string(name) + "' (expected SP or HA)");
}

NodeId hub_removal_count(NodeId n, double fraction) {
    if (!(fraction >= 0.0) || fraction >= 1.0) {
        throw std::invalid_argument("hub-avoidance fraction must lie in [0, 1)");
    }
    if (fraction == 0.0) {
        return 0;
    }
    return std::max<NodeId>(1, static_cast<NodeId>(std::floor(fraction * n)));
}

std::vector<NodeId> hub_removal_set(const Graph& g, double fraction) {
    const NodeId x = hub_removal_count(g.node_count(), fraction);
    std::vector<NodeId> order(static_cast<std::size_t>(g.node_count()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
    order.resize(static_cast<std::size_t>(std::min(x, g.node_count())));
    return order;
}

std::vector<NodeId> PathView::to_vector() const {
    std::vector<NodeId> out(size_);
    for (std::uint32_t i = 0; i < size_; ++i) {
        out[i] = (*this)[i];
    }
    return out;
}

std::size_t RouteTable::pair_index(NodeId s, NodeId d) const {
    if (s > d) {
        std::swap(s, d);
    }
    const auto a = static_cast<std::size_t>(s);
    const auto n = static_cast<std::size_t>(n_);
    return a * (2 * n - a - 1) / 2 + static_cast<std::size_t>(d - s - 1);
}

bool RouteTable::has_path(NodeId s, NodeId d) const {
    if (s == d || s < 0 || d < 0 || s >= n_ || d >= n_) {
        return false;
    }
    const auto i = pair_index(s, d);
    return offsets_[i + 1] > offsets_[i];
}

PathView RouteTable::path(NodeId s, NodeId d) const {
    if (!has_path(s, d)) {
        throw RoutingError("no route for pair (" + std::to_string(s) + ", " + std::to_string(d) + ")");
    }
    const auto i = pair_index(s, d);
    return {nodes_.data() + offsets_[i], static_cast<std::uint32_t>(offsets_[i + 1] - offsets_[i]), s > d};
}

std::optional<Edge> RouteTable::missing_pair() const {
    for (NodeId s = 0; s < n_; ++s) {
        for (NodeId d = s + 1; d < n_; ++d) {
            if (!has_path(s, d)) {
                return Edge{s, d};
            }
        }
    }
    return std::nullopt;
}

RouteTableBuilder::RouteTableBuilder(NodeId n, RouteSpec spec, std::vector<NodeId> removed) {
    table_.n_ = n;
    table_.spec_ = spec;
    table_.removed_ = std::move(removed);
    const auto pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(n - 1, 0)) / 2;
    paths_.resize(pairs);
}

void RouteTableBuilder::set_path(NodeId s, NodeId d, std::span<const NodeId> path) {
    if (s == d || s < 0 || d < 0 || s >= table_.n_ || d >= table_.n_) {
        throw RoutingError("invalid pair (" + std::to_string(s) + ", " + std::to_string(d) + ")");
    }
    if (path.size() < 2 || path.front() != s || path.back() != d) {
        throw RoutingError("path for (" + std::to_string(s) + ", " + std::to_string(d) + ") has wrong endpoints");
    }
    auto& slot = paths_[table_.pair_index(s, d)];
    slot.assign(path.begin(), path.end());
    if (s > d) {
        std::reverse(slot.begin(), slot.end());
    }
}

RouteTable RouteTableBuilder::build() && {
    auto& t = table_;
    t.offsets_.assign(paths_.size() + 1, 0);
    std::size_t total = 0;
    for (std::size_t i = 0; i < paths_.size(); ++i) {
        total += paths_[i].size();
        t.offsets_[i + 1] = total;
    }
    t.nodes_.reserve(total);
    for (auto& p : paths_) {
        t.nodes_.insert(t.nodes_.end(), p.begin(), p.end());
        std::vector<NodeId>().swap(p);
    }
    return std::move(t);
}

namespace {

// Breadth-first shortest-path DAG rooted at one source. sigma[v] is the
// number of shortest paths from the root to v.
struct ShortestPathDag {
    std::vector<int> dist;
    std::vector<double> sigma;
    std::vector<std::uint32_t> pred_begin;
    std::vector<std::uint32_t> pred_end;
    std::vector<NodeId> preds;
    std::vector<NodeId> order;

    void build(const Graph& g, NodeId root, const std::vector<char>* blocked) {
        const auto n = static_cast<std::size_t>(g.node_count());
        dist.assign(n, -1);
        sigma.assign(n, 0.0);
        pred_begin.assign(n, 0);
        pred_end.assign(n, 0);
        preds.clear();
        order.clear();

        dist[root] = 0;
        sigma[root] = 1.0;
        order.push_back(root);
        for (std::size_t head = 0; head < order.size(); ++head) {
            const NodeId u = order[head];
            for (NodeId v : g.neighbors(u)) {
                if (blocked && (*blocked)[v]) {
                    continue;
                }
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    order.push_back(v);
                }
            }
        }
        for (std::size_t i = 1; i < order.size(); ++i) {
            const NodeId v = order[i];
            pred_begin[v] = static_cast<std::uint32_t>(preds.size());
            for (NodeId p : g.neighbors(v)) {
                if (dist[p] == dist[v] - 1 && !(blocked && (*blocked)[p])) {
                    preds.push_back(p);
                    sigma[v] += sigma[p];
                }
            }
            pred_end[v] = static_cast<std::uint32_t>(preds.size());
        }
    }

    bool reaches(NodeId v) const { return dist[v] >= 0; }

    // Uniform over all shortest root->target paths: walking back from the
    // target, predecessor p is taken with probability sigma[p] / sigma[v].
    void sample(NodeId target, Rng& rng, std::vector<NodeId>& out) const {
        out.clear();
        NodeId v = target;
        out.push_back(v);
        while (dist[v] > 0) {
            const std::uint32_t first = pred_begin[v];
            const std::uint32_t last = pred_end[v];
            NodeId next = preds[last - 1];
            if (last - first > 1) {
                const double r = uniform_real(rng) * sigma[v];
                double acc = 0.0;
                for (std::uint32_t i = first; i < last; ++i) {
                    acc += sigma[preds[i]];
                    if (r < acc) {
                        next = preds[i];
                        break;
                    }
                }
            }
            v = next;
            out.push_back(v);
        }
        std::reverse(out.begin(), out.end());
    }
};

}  // namespace

RouteSampler::RouteSampler(const Graph& g, const RouteSpec& spec) : g_(&g), spec_(spec) {
    if (!g.is_connected()) {
        throw RoutingError("routing requires a connected graph");
    }
    if (spec.protocol == Protocol::hub_avoidance) {
        removed_ = hub_removal_set(g, spec.ha_fraction);
    }
    is_removed_.assign(static_cast<std::size_t>(g.node_count()), 0);
    for (NodeId v : removed_) {
        is_removed_[v] = 1;
    }
}

void RouteSampler::for_each_from(NodeId source, const Visitor& visit) const {
    const Graph& g = *g_;
    Rng rng(derive_seed(spec_.seed, static_cast<std::uint64_t>(source)));

    // thread_local so that concurrent samplers over different sources reuse
    // their own scratch space.
    thread_local ShortestPathDag full;
    thread_local ShortestPathDag cluster;
    thread_local std::vector<NodeId> path;

    full.build(g, source, nullptr);
    const bool use_cluster = !removed_.empty() && !is_removed_[source];
    if (use_cluster) {
        cluster.build(g, source, &is_removed_);
    }

    for (NodeId d = source + 1; d < g.node_count(); ++d) {
        if (use_cluster && cluster.reaches(d)) {
            cluster.sample(d, rng, path);
        } else {
            full.sample(d, rng, path);
        }
        visit(d, path);
    }
}

RouteTable build_routes(const Graph& g, const RouteSpec& spec) {
    RouteSampler sampler(g, spec);
    RouteTable t;
    t.n_ = g.node_count();
    t.spec_ = spec;
    t.removed_ = sampler.removed_nodes();
    // The sampler emits pairs in ascending (s, d) order, which is exactly the
    // storage order, so paths are appended directly.
    t.offsets_.reserve(static_cast<std::size_t>(t.n_) * static_cast<std::size_t>(std::max(t.n_ - 1, 0)) / 2 + 1);
    t.offsets_.push_back(0);
    for (NodeId s = 0; s < t.n_; ++s) {
        sampler.for_each_from(s, [&](NodeId, std::span<const NodeId> path) {
            t.nodes_.insert(t.nodes_.end(), path.begin(), path.end());
            t.offsets_.push_back(t.nodes_.size());
        });
    }
    return t;
}

RouteTable shortest_path_routes(const Graph& g, std::uint64_t seed) {
    return build_routes(g, {Protocol::shortest_path, 0.0, seed});
}

RouteTable hub_avoidance_routes(const Graph& g, double fraction, std::uint64_t seed) {
    return build_routes(g, {Protocol::hub_avoidance, fraction, seed});
}

std::string validate_routes(const Graph& g, const RouteTable& routes) {
    const NodeId n = g.node_count();
    if (routes.node_count() != n) {
        return "route table covers " + std::to_string(routes.node_count()) + " nodes, graph has " +
               std::to_string(n);
    }
    std::vector<int> stamp(static_cast<std::size_t>(n), -1);
    int pair_id = 0;
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId d = 0; d < n; ++d, ++pair_id) {
            if (s == d) {
                continue;
            }
            const std::string tag = "(" + std::to_string(s) + ", " + std::to_string(d) + ")";
            if (!routes.has_path(s, d)) {
                return "missing route " + tag;
            }
            const PathView p = routes.path(s, d);
            if (p.front() != s || p.back() != d) {
                return "wrong endpoints on " + tag;
            }
            for (std::uint32_t i = 0; i < p.size(); ++i) {
                if (stamp[p[i]] == pair_id) {
                    return "repeated node " + std::to_string(p[i]) + " on " + tag;
                }
                stamp[p[i]] = pair_id;
                if (i + 1 < p.size() && !g.has_edge(p[i], p[i + 1])) {
                    return "non-adjacent hop " + std::to_string(p[i]) + "->" + std::to_string(p[i + 1]) + " on " +
                           tag;
                }
            }
        }
    }
    return {};
}

BetweennessReport BetweennessReport::from_counts(std::vector<std::int64_t> counts) {
    BetweennessReport r;
    r.node_count = static_cast<NodeId>(counts.size());
    r.counts = std::move(counts);
    for (NodeId v = 0; v < r.node_count; ++v) {
        if (r.counts[v] > r.max_betweenness) {
            r.max_betweenness = r.counts[v];
            r.argmax = v;
        }
    }
    return r;
}

BetweennessReport route_betweenness(const RouteTable& routes) {
    if (auto missing = routes.missing_pair()) {
        throw RoutingError("incomplete route table: no route for pair (" + std::to_string(missing->first) + ", " +
                           std::to_string(missing->second) + ")");
    }
    const NodeId n = routes.node_count();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId d = s + 1; d < n; ++d) {
            const PathView p = routes.path(s, d);
            // Each stored path serves both orientations.
            for (std::uint32_t i = 1; i + 1 < p.size(); ++i) {
                counts[p[i]] += 2;
            }
        }
    }
    return BetweennessReport::from_counts(std::move(counts));
}

BetweennessReport streamed_betweenness(const Graph& g, const RouteSpec& spec, int workers) {
    const NodeId n = g.node_count();
    RouteSampler sampler(g, spec);
    workers = std::clamp(workers, 1, std::max<NodeId>(1, n));

    std::vector<std::vector<std::int64_t>> partial(static_cast<std::size_t>(workers),
                                                   std::vector<std::int64_t>(static_cast<std::size_t>(n), 0));
    auto work = [&](int w) {
        auto& counts = partial[w];
        for (NodeId s = w; s < n; s += workers) {
            sampler.for_each_from(s, [&](NodeId, std::span<const NodeId> path) {
                for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                    counts[path[i]] += 2;
                }
            });
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> threads;
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back(work, w);
        }
    }

    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    for (const auto& part : partial) {
        for (NodeId v = 0; v < n; ++v) {
            counts[v] += part[v];
        }
    }
    return BetweennessReport::from_counts(std::move(counts));
}

double predict_gamma_c(const BetweennessReport& report, PredictionMode mode) {
    const auto load = static_cast<double>(report.node_count - 1);
    const auto b = static_cast<double>(report.max_betweenness);
    const double denom = mode == PredictionMode::paper ? b : b + load;
    if (denom <= 0.0) {
        return 1.0;
    }
    return std::min(1.0, load / denom);
}

void write_betweenness_csv(const BetweennessReport& report, const RouteSpec& spec, std::ostream& out) {
    out << "# B=" << report.max_betweenness << " argmax=" << report.argmax << " N=" << report.node_count
        << " protocol=" << protocol_name(spec.protocol) << " seed=" << spec.seed;
    if (spec.protocol == Protocol::hub_avoidance) {
        out << " ha_fraction=" << spec.ha_fraction;
    }
    out << "\nnode_id,b\n";
    for (NodeId v = 0; v < report.node_count; ++v) {
        out << v << "," << report.counts[v] << "\n";
    }
}

void write_route_dump(const RouteTable& routes, std::ostream& out) {
    const NodeId n = routes.node_count();
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId d = 0; d < n; ++d) {
            if (s == d) {
                continue;
            }
            const PathView p = routes.path(s, d);
            out << s << " " << d;
            for (std::uint32_t i = 0; i < p.size(); ++i) {
                out << " " << p[i];
            }
            out << "\n";
        }
    }
}

}  // namespace sfroute
