#include "sfroute/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "sfroute/rng.hpp"

namespace sfroute {

Graph Graph::from_edges(NodeId n, std::span<const Edge> edges) {
    if (n < 0) {
        throw GraphError("node count must be non-negative");
    }
    std::vector<std::size_t> deg(static_cast<std::size_t>(n), 0);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n) {
            throw GraphError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range for " +
                             std::to_string(n) + " nodes");
        }
        if (u == v) {
            throw GraphError("self-loop at node " + std::to_string(u));
        }
        ++deg[u];
        ++deg[v];
    }

    Graph g;
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (NodeId v = 0; v < n; ++v) {
        g.offsets_[v + 1] = g.offsets_[v] + deg[v];
    }
    g.targets_.resize(g.offsets_.back());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
        g.targets_[fill[u]++] = v;
        g.targets_[fill[v]++] = u;
    }
    for (NodeId v = 0; v < n; ++v) {
        auto first = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
        auto last = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
        std::sort(first, last);
        if (auto dup = std::adjacent_find(first, last); dup != last) {
            throw GraphError("duplicate edge (" + std::to_string(std::min(v, *dup)) + ", " +
                             std::to_string(std::max(v, *dup)) + ")");
        }
    }
    return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) {
                out.emplace_back(u, v);
            }
        }
    }
    return out;
}

std::vector<int> Graph::degrees() const {
    std::vector<int> out(static_cast<std::size_t>(node_count()));
    for (NodeId v = 0; v < node_count(); ++v) {
        out[v] = degree(v);
    }
    return out;
}

bool Graph::is_connected() const {
    const NodeId n = node_count();
    if (n == 0) {
        return true;
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    NodeId reached = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : neighbors(u)) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

DegreeDistribution::DegreeDistribution(double lambda, int k_min, int k_max)
    : lambda_(lambda), k_min_(k_min), k_max_(k_max) {
    if (!(lambda > 2.0)) {
        throw std::invalid_argument("degree exponent lambda must exceed 2");
    }
    if (k_min < 1) {
        throw std::invalid_argument("k_min must be at least 1");
    }
    if (k_min > k_max) {
        throw std::invalid_argument("k_min (" + std::to_string(k_min) + ") exceeds k_max (" +
                                    std::to_string(k_max) + ")");
    }
    double total = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        total += std::pow(static_cast<double>(k), -lambda);
    }
    normalization_ = 1.0 / total;

    cdf_.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    double acc = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        acc += pmf(k);
        cdf_.push_back(acc);
    }
    cdf_.back() = 1.0;
}

double DegreeDistribution::pmf(int k) const {
    if (k < k_min_ || k > k_max_) {
        return 0.0;
    }
    return normalization_ * std::pow(static_cast<double>(k), -lambda_);
}

double DegreeDistribution::mean() const {
    double m = 0.0;
    for (int k = k_min_; k <= k_max_; ++k) {
        m += k * pmf(k);
    }
    return m;
}

int DegreeDistribution::sample(double u) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) {
        --it;
    }
    return k_min_ + static_cast<int>(it - cdf_.begin());
}

int structural_cutoff(NodeId n) {
    auto k = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (static_cast<long long>(k + 1) * (k + 1) <= n) {
        ++k;
    }
    while (static_cast<long long>(k) * k > n) {
        --k;
    }
    return k;
}

int default_k_max(NodeId n, double lambda) {
    return lambda < 3.0 ? structural_cutoff(n) : n - 1;
}

long long DegreeSequence::total() const {
    return std::accumulate(degrees.begin(), degrees.end(), 0LL);
}

DegreeSequence sample_degree_sequence(NodeId n, const DegreeDistribution& dist, std::uint64_t seed) {
    if (n < 2) {
        throw std::invalid_argument("degree sequence needs at least 2 nodes");
    }
    if (dist.k_max() > n - 1) {
        throw std::invalid_argument("k_max (" + std::to_string(dist.k_max()) + ") exceeds n - 1 = " +
                                    std::to_string(n - 1));
    }
    const bool mixed_parity = dist.k_max() > dist.k_min();
    if (!mixed_parity && (static_cast<long long>(n) * dist.k_min()) % 2 != 0) {
        throw std::invalid_argument("single-valued support with odd degree sum can never be graphical");
    }

    Rng rng(seed);
    DegreeSequence seq;
    seq.degrees.resize(static_cast<std::size_t>(n));
    for (auto& d : seq.degrees) {
        d = dist.sample(uniform_real(rng));
    }
    if (seq.total() % 2 != 0) {
        auto& d = seq.degrees[uniform_index(rng, static_cast<std::uint64_t>(n))];
        const int old = d;
        do {
            d = dist.sample(uniform_real(rng));
        } while ((d - old) % 2 == 0);
    }
    return seq;
}

namespace {

std::string describe(const DegreeSequence& seq) {
    std::ostringstream os;
    os << "[";
    const std::size_t shown = std::min<std::size_t>(seq.degrees.size(), 32);
    for (std::size_t i = 0; i < shown; ++i) {
        os << (i ? "," : "") << seq.degrees[i];
    }
    if (shown < seq.degrees.size()) {
        os << ",... (" << seq.degrees.size() << " entries)";
    }
    os << "]";
    return os.str();
}

std::uint64_t edge_key(NodeId u, NodeId v) {
    if (u > v) {
        std::swap(u, v);
    }
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

constexpr int kPartnerDraws = 64;

}  // namespace

Graph build_configuration_model(const DegreeSequence& seq, std::uint64_t seed, int max_restarts) {
    const auto n = static_cast<NodeId>(seq.degrees.size());
    if (seq.total() % 2 != 0) {
        throw GraphError("degree sequence has odd sum: " + describe(seq));
    }
    for (int d : seq.degrees) {
        if (d < 0 || d > n - 1) {
            throw GraphError("degree out of range in sequence " + describe(seq));
        }
    }

    Rng rng(seed);
    std::vector<NodeId> pool;
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> present;
    std::vector<std::size_t> candidates;

    for (int attempt = 0; attempt <= max_restarts; ++attempt) {
        pool.clear();
        for (NodeId v = 0; v < n; ++v) {
            pool.insert(pool.end(), static_cast<std::size_t>(seq.degrees[v]), v);
        }
        shuffle(std::span(pool), rng);
        edges.clear();
        present.clear();
        present.reserve(pool.size());

        bool stuck = false;
        while (!pool.empty()) {
            const NodeId u = pool.back();
            pool.pop_back();
            auto admissible = [&](std::size_t j) {
                return pool[j] != u && !present.contains(edge_key(u, pool[j]));
            };

            std::size_t pick = pool.size();
            for (int draw = 0; draw < kPartnerDraws && !pool.empty(); ++draw) {
                auto j = static_cast<std::size_t>(uniform_index(rng, pool.size()));
                if (admissible(j)) {
                    pick = j;
                    break;
                }
            }
            if (pick == pool.size()) {
                candidates.clear();
                for (std::size_t j = 0; j < pool.size(); ++j) {
                    if (admissible(j)) {
                        candidates.push_back(j);
                    }
                }
                if (candidates.empty()) {
                    stuck = true;
                    break;
                }
                pick = candidates[uniform_index(rng, candidates.size())];
            }

            const NodeId v = pool[pick];
            pool[pick] = pool.back();
            pool.pop_back();
            present.insert(edge_key(u, v));
            edges.emplace_back(std::min(u, v), std::max(u, v));
        }
        if (!stuck) {
            return Graph::from_edges(n, edges);
        }
    }
    throw GraphError("configuration model: restart budget of " + std::to_string(max_restarts) +
                     " exhausted for sequence " + describe(seq));
}

ComponentExtraction largest_component(const Graph& g) {
    const NodeId n = g.node_count();
    if (n == 0) {
        throw GraphError("largest_component needs at least one node");
    }
    std::vector<NodeId> label(static_cast<std::size_t>(n), -1);
    std::vector<NodeId> sizes;
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < n; ++s) {
        if (label[s] >= 0) {
            continue;
        }
        const auto id = static_cast<NodeId>(sizes.size());
        sizes.push_back(0);
        label[s] = id;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            ++sizes[id];
            for (NodeId v : g.neighbors(u)) {
                if (label[v] < 0) {
                    label[v] = id;
                    stack.push_back(v);
                }
            }
        }
    }
    // max_element returns the first maximum, i.e. the component discovered
    // from the smallest node id.
    const auto best = static_cast<NodeId>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

    ComponentExtraction out;
    out.old_to_new.assign(static_cast<std::size_t>(n), -1);
    for (NodeId v = 0; v < n; ++v) {
        if (label[v] == best) {
            out.old_to_new[v] = static_cast<NodeId>(out.new_to_old.size());
            out.new_to_old.push_back(v);
        }
    }
    std::vector<Edge> edges;
    for (const auto& [u, v] : g.edges()) {
        if (label[u] == best) {
            edges.emplace_back(out.old_to_new[u], out.old_to_new[v]);
        }
    }
    out.graph = Graph::from_edges(static_cast<NodeId>(out.new_to_old.size()), edges);
    return out;
}

Graph read_edge_list(std::istream& in) {
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    NodeId declared = -1;
    NodeId max_id = -1;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw GraphError("edge list line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        if (line[first] == '#') {
            std::istringstream meta(line.substr(first + 1));
            std::string key;
            long long value = 0;
            if (meta >> key && key == "nodes" && meta >> value) {
                if (value < 0 || value > INT32_MAX) {
                    fail("invalid node count");
                }
                declared = static_cast<NodeId>(value);
            }
            continue;
        }
        std::istringstream fields(line);
        long long u = 0;
        long long v = 0;
        std::string extra;
        if (!(fields >> u >> v) || (fields >> extra)) {
            fail("malformed edge '" + line + "'");
        }
        if (u < 0 || v < 0 || u > INT32_MAX - 1 || v > INT32_MAX - 1) {
            fail("node id out of range");
        }
        if (declared >= 0 && (u >= declared || v >= declared)) {
            fail("node id out of range for " + std::to_string(declared) + " nodes");
        }
        if (u == v) {
            fail("self-loop at node " + std::to_string(u));
        }
        if (!seen.insert(edge_key(static_cast<NodeId>(u), static_cast<NodeId>(v))).second) {
            fail("duplicate edge " + std::to_string(std::min(u, v)) + " " + std::to_string(std::max(u, v)));
        }
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        max_id = std::max({max_id, static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
    const NodeId n = declared >= 0 ? declared : max_id + 1;
    return Graph::from_edges(n, edges);
}

void write_edge_list(const Graph& g, std::ostream& out) {
    out << "# nodes " << g.node_count() << "\n";
    for (const auto& [u, v] : g.edges()) {
        out << u << " " << v << "\n";
    }
}

Graph load_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw GraphError("cannot open edge list " + path.string());
    }
    return read_edge_list(in);
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw GraphError("cannot write edge list " + path.string());
    }
    write_edge_list(g, out);
}

Graph path_graph(NodeId n) {
    std::vector<Edge> edges;
    for (NodeId v = 0; v + 1 < n; ++v) {
        edges.emplace_back(v, v + 1);
    }
    return Graph::from_edges(n, edges);
}

Graph cycle_graph(NodeId n) {
    if (n < 3) {
        throw GraphError("cycle needs at least 3 nodes");
    }
    std::vector<Edge> edges;
    for (NodeId v = 0; v < n; ++v) {
        edges.emplace_back(std::min(v, (v + 1) % n), std::max(v, (v + 1) % n));
    }
    return Graph::from_edges(n, edges);
}

Graph star_graph(NodeId n) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) {
        edges.emplace_back(0, v);
    }
    return Graph::from_edges(n, edges);
}

Graph complete_graph(NodeId n) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            edges.emplace_back(u, v);
        }
    }
    return Graph::from_edges(n, edges);
}

}  // namespace sfroute
