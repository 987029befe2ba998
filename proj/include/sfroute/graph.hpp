#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sfroute {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simple undirected graph in compressed adjacency form. Immutable once
// built; neighbor lists are sorted ascending.
class Graph {
public:
    Graph() = default;

    // Validates simplicity and id range; throws GraphError.
    static Graph from_edges(NodeId n, std::span<const Edge> edges);

    NodeId node_count() const { return static_cast<NodeId>(offsets_.empty() ? 0 : offsets_.size() - 1); }
    std::size_t edge_count() const { return targets_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
    }
    int degree(NodeId v) const { return static_cast<int>(offsets_[v + 1] - offsets_[v]); }
    bool has_edge(NodeId u, NodeId v) const;

    // Every edge once as (u, v) with u < v, sorted.
    std::vector<Edge> edges() const;
    std::vector<int> degrees() const;
    bool is_connected() const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
};

/// Truncated discrete power law P(k) = A k^-lambda on [k_min, k_max].
/// The normalization A is an explicit sum over the support.
class DegreeDistribution {
public:
    DegreeDistribution(double lambda, int k_min, int k_max);

    double lambda() const { return lambda_; }
    int k_min() const { return k_min_; }
    int k_max() const { return k_max_; }
    double normalization() const { return normalization_; }

    double pmf(int k) const;
    double mean() const;
    // Inverse-CDF draw.
    int sample(double u) const;

private:
    double lambda_;
    int k_min_;
    int k_max_;
    double normalization_;
    std::vector<double> cdf_;
};

// Structural cutoff floor(sqrt(n)), the uncorrelated limit for 2 < lambda < 3.
int structural_cutoff(NodeId n);

// Default k_max: the structural cutoff when 2 < lambda < 3, otherwise n - 1.
int default_k_max(NodeId n, double lambda);

struct DegreeSequence {
    std::vector<int> degrees;

    long long total() const;
    friend bool operator==(const DegreeSequence&, const DegreeSequence&) = default;
};

DegreeSequence sample_degree_sequence(NodeId n, const DegreeDistribution& dist, std::uint64_t seed);

Graph build_configuration_model(const DegreeSequence& seq, std::uint64_t seed, int max_restarts = 1000);

struct ComponentExtraction {
    Graph graph;
    std::vector<NodeId> old_to_new;  // -1 for dropped nodes
    std::vector<NodeId> new_to_old;
};

// Largest connected component, relabeled 0..m-1 preserving the original
// relative order. Equal-size components resolve to the one holding the
// smallest id.
ComponentExtraction largest_component(const Graph& g);

Graph read_edge_list(std::istream& in);
void write_edge_list(const Graph& g, std::ostream& out);
Graph load_edge_list(const std::filesystem::path& path);
void save_edge_list(const Graph& g, const std::filesystem::path& path);

// Small named graphs used throughout tests and examples.
Graph path_graph(NodeId n);
Graph cycle_graph(NodeId n);
Graph star_graph(NodeId n);  // node 0 is the center
Graph complete_graph(NodeId n);

}  // namespace sfroute
