#include "sfroute/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <string>

namespace sfroute {

namespace {

using Mask = std::uint32_t;

std::vector<Mask> adjacency_masks(const Graph& g, NodeId limit, const char* what) {
    const NodeId n = g.node_count();
    if (n > limit || n > 30) {
        throw EnumerationLimitError(std::string(what) + ": exhaustive enumeration refused for " +
                                    std::to_string(n) + " nodes (limit " + std::to_string(limit) +
                                    "); extract a smaller subgraph or raise the limit");
    }
    if (n < 1) {
        throw std::invalid_argument(std::string(what) + ": empty graph");
    }
    std::vector<Mask> adj(static_cast<std::size_t>(n), 0);
    for (NodeId v = 0; v < n; ++v) {
        for (NodeId u : g.neighbors(v)) {
            adj[v] |= Mask{1} << u;
        }
    }
    return adj;
}

std::vector<NodeId> ids_of(Mask m) {
    std::vector<NodeId> out;
    while (m) {
        out.push_back(std::countr_zero(m));
        m &= m - 1;
    }
    return out;
}

// Lexicographic order of the sorted id lists of two sets.
bool lex_less(Mask a, Mask b) {
    while (a && b) {
        const int x = std::countr_zero(a);
        const int y = std::countr_zero(b);
        if (x != y) {
            return x < y;
        }
        a &= a - 1;
        b &= b - 1;
    }
    return !a && b;
}

Mask flood(Mask seed, Mask allowed, const std::vector<Mask>& adj) {
    Mask comp = seed;
    Mask frontier = seed;
    while (frontier) {
        Mask next = 0;
        for (Mask f = frontier; f; f &= f - 1) {
            next |= adj[std::countr_zero(f)];
        }
        next &= allowed & ~comp;
        comp |= next;
        frontier = next;
    }
    return comp;
}

}  // namespace

SeparatorResult min_sparsity_separator(const Graph& g, NodeId limit) {
    const auto adj = adjacency_masks(g, limit, "min_sparsity_separator");
    const NodeId n = g.node_count();
    if (!g.is_connected()) {
        throw std::invalid_argument("min_sparsity_separator: graph must be connected");
    }
    const Mask all = n == 32 ? ~Mask{0} : (Mask{1} << n) - 1;

    bool found = false;
    Mask best_x = 0;
    Mask best_a = 0;
    std::int64_t best_x_size = 0;
    std::int64_t best_ab = 0;  // |A| * |B|

    std::vector<Mask> comps;
    std::vector<int> sizes;
    std::vector<Mask> reach;  // reach[i]: bit s set when size s is a subset sum of the first i components

    for (Mask x = 1; x < all; ++x) {
        const int xs = std::popcount(x);
        if (xs > n - 2) {
            continue;
        }
        const Mask rest = all & ~x;
        comps.clear();
        for (Mask left = rest; left;) {
            const Mask c = flood(left & (~left + 1), rest, adj);
            comps.push_back(c);
            left &= ~c;
        }
        if (comps.size() < 2) {
            continue;
        }

        const int total = n - xs;
        sizes.resize(comps.size());
        reach.assign(comps.size() + 1, 0);
        reach[0] = 1;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            sizes[i] = std::popcount(comps[i]);
            reach[i + 1] = reach[i] | (reach[i] << sizes[i]);
        }
        int a = total / 2;
        while (a > 0 && !((reach.back() >> a) & 1)) {
            --a;
        }
        const std::int64_t ab = static_cast<std::int64_t>(a) * (total - a);

        // Compare xs/ab against best_x_size/best_ab without division.
        bool better = !found;
        if (found) {
            const std::int64_t lhs = xs * best_ab;
            const std::int64_t rhs = best_x_size * ab;
            better = lhs < rhs || (lhs == rhs && (xs < best_x_size || (xs == best_x_size && lex_less(x, best_x))));
        }
        if (!better) {
            continue;
        }

        Mask side_a = 0;
        int need = a;
        for (std::size_t i = comps.size(); i-- > 0;) {
            if ((reach[i] >> need) & 1) {
                continue;
            }
            side_a |= comps[i];
            need -= sizes[i];
        }
        found = true;
        best_x = x;
        best_a = side_a;
        best_x_size = xs;
        best_ab = ab;
    }

    SeparatorResult r;
    if (!found) {
        return r;
    }
    r.has_separator = true;
    r.separator = ids_of(best_x);
    r.side_a = ids_of(best_a);
    r.side_b = ids_of(all & ~best_x & ~best_a);
    r.sparsity = static_cast<double>(best_x_size) / static_cast<double>(best_ab);
    r.bound = static_cast<double>(best_ab) / static_cast<double>(best_x_size);
    return r;
}

ExpansionResult edge_expansion(const Graph& g, NodeId limit) {
    const auto adj = adjacency_masks(g, limit, "edge_expansion");
    const NodeId n = g.node_count();
    if (n < 2) {
        throw std::invalid_argument("edge_expansion: needs at least 2 nodes");
    }
    const Mask all = n == 32 ? ~Mask{0} : (Mask{1} << n) - 1;

    ExpansionResult r;
    Mask best = 0;
    bool found = false;
    for (Mask a = 1; a < all; ++a) {
        const int size = std::popcount(a);
        if (2 * size > n) {
            continue;
        }
        std::int64_t cut = 0;
        for (Mask m = a; m; m &= m - 1) {
            cut += std::popcount(adj[std::countr_zero(m)] & ~a);
        }
        bool better = !found;
        if (found) {
            const std::int64_t lhs = cut * r.set_size;
            const std::int64_t rhs = r.cut_edges * size;
            better = lhs < rhs || (lhs == rhs && (size < r.set_size || (size == r.set_size && lex_less(a, best))));
        }
        if (better) {
            found = true;
            best = a;
            r.cut_edges = cut;
            r.set_size = size;
        }
    }
    r.chi_e = static_cast<double>(r.cut_edges) / static_cast<double>(r.set_size);
    r.witness = ids_of(best);
    return r;
}

double b_e_exponent(double lambda, bool with_structural_cutoff) {
    if (!(lambda > 2.0)) {
        throw std::invalid_argument("b_e_exponent: lambda must exceed 2");
    }
    if (std::isinf(lambda)) {
        return 1.0;
    }
    if (with_structural_cutoff && lambda < 3.0) {
        return 1.5;
    }
    return lambda / (lambda - 1.0);
}

BoundCheck verify_topological_bound(const Graph& g, const BetweennessReport& report, NodeId limit) {
    if (report.node_count != g.node_count()) {
        throw std::invalid_argument("verify_topological_bound: report and graph sizes differ");
    }
    BoundCheck check;
    check.separator = min_sparsity_separator(g, limit);
    check.half_max_betweenness = static_cast<double>(report.max_betweenness) / 2.0;
    check.bound = check.separator.bound;
    if (!check.separator.has_separator) {
        check.holds = true;
        check.margin = std::numeric_limits<double>::infinity();
        return check;
    }
    // B/2 >= |A||B|/|X|, in integers.
    const auto xs = static_cast<std::int64_t>(check.separator.separator.size());
    const auto ab = static_cast<std::int64_t>(check.separator.side_a.size() * check.separator.side_b.size());
    check.holds = report.max_betweenness * xs >= 2 * ab;
    check.margin = check.half_max_betweenness / check.bound;
    return check;
}

namespace {

void write_ids(const std::vector<NodeId>& ids, std::ostream& out) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << (i ? " " : "") << ids[i];
    }
}

}  // namespace

void write_separator_text(const SeparatorResult& r, std::ostream& out) {
    out << "separator:\n";
    if (!r.has_separator) {
        out << "  none (complete graph)\n  bound: 0\n";
        return;
    }
    out << "  X: ";
    write_ids(r.separator, out);
    out << "\n  A: ";
    write_ids(r.side_a, out);
    out << "\n  B: ";
    write_ids(r.side_b, out);
    out << "\n  sparsity: " << r.separator.size() << "/" << r.side_a.size() * r.side_b.size() << " = " << r.sparsity
        << "\n  bound: " << r.bound << "\n";
}

void write_expansion_text(const ExpansionResult& r, std::ostream& out) {
    out << "edge_expansion:\n  A: ";
    write_ids(r.witness, out);
    out << "\n  chi_e: " << r.cut_edges << "/" << r.set_size << " = " << r.chi_e << "\n";
}

void write_bounds_csv_header(std::ostream& out) {
    out << "graph,N,has_separator,separator,side_a,side_b,sparsity,B_T,chi_e_cut,chi_e_size,chi_e\n";
}

void write_bounds_csv_row(const std::string& label, NodeId n, const SeparatorResult& sep,
                          const ExpansionResult& exp, std::ostream& out) {
    out << label << "," << n << "," << (sep.has_separator ? 1 : 0) << ",";
    write_ids(sep.separator, out);
    out << ",";
    write_ids(sep.side_a, out);
    out << ",";
    write_ids(sep.side_b, out);
    out << "," << sep.sparsity << "," << sep.bound << "," << exp.cut_edges << "," << exp.set_size << "," << exp.chi_e
        << "\n";
}

}  // namespace sfroute
