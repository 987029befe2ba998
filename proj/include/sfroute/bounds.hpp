#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfroute/graph.hpp"
#include "sfroute/routing.hpp"

namespace sfroute {

class EnumerationLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr NodeId kDefaultEnumerationLimit = 20;

/// Minimum-sparsity vertex separator. Sparsity is |X| / (|A| |B|) and the
/// topological bound on maximal betweenness is its reciprocal, counted over
/// unordered source-destination pairs.
struct SeparatorResult {
    bool has_separator = false;  // false only for complete graphs
    std::vector<NodeId> separator;
    std::vector<NodeId> side_a;  // |side_a| <= |side_b|
    std::vector<NodeId> side_b;
    double sparsity = std::numeric_limits<double>::infinity();
    double bound = 0.0;  // 1 / sparsity, or 0 when no separator exists
};

struct ExpansionResult {
    std::int64_t cut_edges = 0;
    std::int64_t set_size = 0;
    double chi_e = 0.0;  // cut_edges / set_size
    std::vector<NodeId> witness;
};

// Exhaustive over all node subsets; refuses graphs above `limit` nodes.
SeparatorResult min_sparsity_separator(const Graph& g, NodeId limit = kDefaultEnumerationLimit);

// Exact edge expansion min cut(A)/|A| over nonempty A with |A| <= N/2.
ExpansionResult edge_expansion(const Graph& g, NodeId limit = kDefaultEnumerationLimit);

// Scaling exponent of the analytical estimate B_e ~ N^e for a power-law
// degree exponent lambda: lambda/(lambda-1), or 3/2 for 2 < lambda < 3 when
// the structural cutoff K_max ~ N^(1/2) is imposed.
double b_e_exponent(double lambda, bool with_structural_cutoff);

struct BoundCheck {
    bool holds = false;
    double half_max_betweenness = 0.0;  // B/2, unordered-pair units
    double bound = 0.0;
    double margin = 0.0;  // (B/2) / bound, +inf when the bound is 0
    SeparatorResult separator;
};

BoundCheck verify_topological_bound(const Graph& g, const BetweennessReport& report,
                                    NodeId limit = kDefaultEnumerationLimit);

void write_separator_text(const SeparatorResult& r, std::ostream& out);
void write_expansion_text(const ExpansionResult& r, std::ostream& out);
void write_bounds_csv_header(std::ostream& out);
void write_bounds_csv_row(const std::string& label, NodeId n, const SeparatorResult& sep,
                          const ExpansionResult& exp, std::ostream& out);

}  // namespace sfroute
