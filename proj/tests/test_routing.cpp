#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "sfroute/graph.hpp"
#include "sfroute/routing.hpp"

using namespace sfroute;

namespace {

std::vector<int> bfs_distances(const Graph& g, NodeId s) {
    std::vector<int> dist(static_cast<std::size_t>(g.node_count()), -1);
    std::deque<NodeId> q{s};
    dist[s] = 0;
    while (!q.empty()) {
        const NodeId u = q.front();
        q.pop_front();
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    return dist;
}

Graph random_cm_graph(NodeId n, std::uint64_t seed) {
    const DegreeDistribution dist(2.5, 2, std::max(2, structural_cutoff(n)));
    const auto seq = sample_degree_sequence(n, dist, seed);
    return largest_component(build_configuration_model(seq, seed)).graph;
}

// Betweenness straight from the ordered-pair definition.
std::vector<std::int64_t> naive_betweenness(const RouteTable& t) {
    std::vector<std::int64_t> b(static_cast<std::size_t>(t.node_count()), 0);
    for (NodeId s = 0; s < t.node_count(); ++s) {
        for (NodeId d = 0; d < t.node_count(); ++d) {
            if (s == d) {
                continue;
            }
            const auto p = t.path(s, d).to_vector();
            for (std::size_t i = 1; i + 1 < p.size(); ++i) {
                ++b[p[i]];
            }
        }
    }
    return b;
}

}  // namespace

TEST_CASE("protocol names") {
    CHECK(protocol_name(Protocol::shortest_path) == "SP");
    CHECK(parse_protocol("HA") == Protocol::hub_avoidance);
    CHECK_THROWS(parse_protocol("XY"));
}

TEST_CASE("SP on P3 and S5") {
    const auto p3 = shortest_path_routes(path_graph(3), 1);
    CHECK(p3.path(0, 2).to_vector() == std::vector<NodeId>{0, 1, 2});
    CHECK(p3.path(2, 0).to_vector() == std::vector<NodeId>{2, 1, 0});

    const auto s5 = shortest_path_routes(star_graph(5), 1);
    for (NodeId i = 1; i < 5; ++i) {
        for (NodeId j = 1; j < 5; ++j) {
            if (i != j) {
                CHECK(s5.path(i, j).to_vector() == std::vector<NodeId>{i, 0, j});
            }
        }
    }
    CHECK_THROWS_AS(s5.path(2, 2), RoutingError);
}

TEST_CASE("SP on C4 picks each shortest path about half the time") {
    const auto c4 = cycle_graph(4);
    int via_1 = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto p = shortest_path_routes(c4, seed).path(0, 2).to_vector();
        CHECK((p == std::vector<NodeId>{0, 1, 2} || p == std::vector<NodeId>{0, 3, 2}));
        via_1 += p[1] == 1;
    }
    CHECK(via_1 / 1000.0 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("SP samples uniformly over unequal predecessor fan-in") {
    // 0 reaches 5 through 1 or 2; 1 and 2 reach 5 via {3} and {3,4}. The
    // three shortest paths 0-1-3-5, 0-2-3-5, 0-2-4-5 should be equally likely.
    const std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 5}, {4, 5}};
    const auto g = Graph::from_edges(6, edges);
    std::map<std::vector<NodeId>, int> freq;
    for (std::uint64_t seed = 0; seed < 3000; ++seed) {
        ++freq[shortest_path_routes(g, seed).path(0, 5).to_vector()];
    }
    REQUIRE(freq.size() == 3);
    for (const auto& [path, count] : freq) {
        CHECK(std::abs(count - 1000) < 120);
    }
}

TEST_CASE("SP rejects disconnected graphs") {
    const auto g = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {2, 3}});
    CHECK_THROWS_AS(shortest_path_routes(g, 1), RoutingError);
}

TEST_CASE("hub removal set") {
    CHECK(hub_removal_count(1000, 0.01) == 10);
    CHECK(hub_removal_count(50, 0.01) == 1);
    CHECK(hub_removal_count(50, 0.0) == 0);
    CHECK_THROWS(hub_removal_count(50, 1.0));
    CHECK_THROWS(hub_removal_count(50, -0.1));
    CHECK(hub_removal_set(path_graph(4), 0.01) == std::vector<NodeId>{1});
    CHECK(hub_removal_set(star_graph(5), 0.01) == std::vector<NodeId>{0});
}

TEST_CASE("HA hand-executed examples") {
    SUBCASE("fraction 0 equals SP") {
        const auto g = random_cm_graph(120, 3);
        const auto ha = hub_avoidance_routes(g, 0.0, 7);
        const auto sp = shortest_path_routes(g, 7);
        for (NodeId s = 0; s < g.node_count(); ++s) {
            for (NodeId d = s + 1; d < g.node_count(); ++d) {
                CHECK(ha.path(s, d).to_vector() == sp.path(s, d).to_vector());
            }
        }
    }
    SUBCASE("S5 with the center removed routes through the center") {
        const auto ha = hub_avoidance_routes(star_graph(5), 0.01, 3);
        const auto sp = shortest_path_routes(star_graph(5), 3);
        CHECK(ha.removed_nodes() == std::vector<NodeId>{0});
        CHECK(route_betweenness(ha).counts == route_betweenness(sp).counts);
    }
    SUBCASE("P4 removes node 1") {
        const auto ha = hub_avoidance_routes(path_graph(4), 0.01, 3);
        CHECK(ha.removed_nodes() == std::vector<NodeId>{1});
        CHECK(ha.path(2, 3).to_vector() == std::vector<NodeId>{2, 3});
        CHECK(ha.path(0, 3).to_vector() == std::vector<NodeId>{0, 1, 2, 3});
        CHECK(ha.path(1, 2).to_vector() == std::vector<NodeId>{1, 2});
    }
}

TEST_CASE("HA keeps intra-cluster routes off the removed hubs") {
    const auto g = random_cm_graph(300, 11);
    const auto ha = hub_avoidance_routes(g, 0.02, 5);
    std::vector<char> removed(static_cast<std::size_t>(g.node_count()), 0);
    for (NodeId h : ha.removed_nodes()) {
        removed[h] = 1;
    }
    // Clusters of the reduced graph, by flood fill.
    std::vector<int> cluster(static_cast<std::size_t>(g.node_count()), -1);
    int clusters = 0;
    for (NodeId s = 0; s < g.node_count(); ++s) {
        if (removed[s] || cluster[s] >= 0) {
            continue;
        }
        std::deque<NodeId> q{s};
        cluster[s] = clusters;
        while (!q.empty()) {
            const NodeId u = q.front();
            q.pop_front();
            for (NodeId v : g.neighbors(u)) {
                if (!removed[v] && cluster[v] < 0) {
                    cluster[v] = clusters;
                    q.push_back(v);
                }
            }
        }
        ++clusters;
    }
    int intra = 0;
    for (NodeId s = 0; s < g.node_count(); ++s) {
        for (NodeId d = s + 1; d < g.node_count(); ++d) {
            if (removed[s] || removed[d] || cluster[s] != cluster[d]) {
                continue;
            }
            ++intra;
            for (NodeId v : ha.path(s, d).to_vector()) {
                CHECK_FALSE(removed[v]);
            }
        }
    }
    CHECK(intra > 0);
}

TEST_CASE("route table invariants on random graphs") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto g = random_cm_graph(150, seed);
        for (const auto& spec : {RouteSpec{Protocol::shortest_path, 0.0, seed}, RouteSpec{Protocol::hub_avoidance, 0.03, seed}}) {
            const auto t = build_routes(g, spec);
            CHECK(validate_routes(g, t).empty());
            CHECK_FALSE(t.missing_pair().has_value());
            CHECK(t == build_routes(g, spec));
            for (NodeId s = 0; s < g.node_count(); s += 7) {
                const auto dist = bfs_distances(g, s);
                for (NodeId d = 0; d < g.node_count(); ++d) {
                    if (d == s) {
                        continue;
                    }
                    auto fwd = t.path(s, d).to_vector();
                    auto back = t.path(d, s).to_vector();
                    std::reverse(back.begin(), back.end());
                    CHECK(fwd == back);
                    if (spec.protocol == Protocol::shortest_path) {
                        CHECK(static_cast<int>(fwd.size()) - 1 == dist[d]);
                    }
                }
            }
        }
    }
}

TEST_CASE("validate_routes reports broken paths") {
    const auto g = path_graph(3);
    RouteTableBuilder builder(3, RouteSpec{});
    builder.set_path(0, 1, std::vector<NodeId>{0, 1});
    builder.set_path(1, 2, std::vector<NodeId>{1, 2});
    builder.set_path(0, 2, std::vector<NodeId>{0, 2});
    CHECK_FALSE(validate_routes(g, std::move(builder).build()).empty());

    RouteTableBuilder partial(3, RouteSpec{});
    partial.set_path(0, 1, std::vector<NodeId>{0, 1});
    const auto t = std::move(partial).build();
    REQUIRE(t.missing_pair().has_value());
    CHECK_THROWS_AS(route_betweenness(t), RoutingError);
}

TEST_CASE("betweenness on hand-counted graphs") {
    const auto p3 = route_betweenness(shortest_path_routes(path_graph(3), 1));
    CHECK(p3.counts == std::vector<std::int64_t>{0, 2, 0});
    CHECK(p3.max_betweenness == 2);
    CHECK(p3.argmax == 1);

    const auto s5 = route_betweenness(shortest_path_routes(star_graph(5), 1));
    CHECK(s5.counts == std::vector<std::int64_t>{12, 0, 0, 0, 0});
    CHECK(s5.max_betweenness == 12);
}

TEST_CASE("betweenness sum identity and streamed agreement") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto g = random_cm_graph(200, seed + 40);
        for (const auto& spec : {RouteSpec{Protocol::shortest_path, 0.0, seed}, RouteSpec{Protocol::hub_avoidance, 0.01, seed}}) {
            const auto t = build_routes(g, spec);
            const auto report = route_betweenness(t);
            CHECK(report.counts == naive_betweenness(t));
            std::int64_t interior = 0;
            for (NodeId s = 0; s < g.node_count(); ++s) {
                for (NodeId d = 0; d < g.node_count(); ++d) {
                    if (s != d) {
                        interior += static_cast<std::int64_t>(t.path(s, d).size()) - 2;
                    }
                }
            }
            CHECK(std::accumulate(report.counts.begin(), report.counts.end(), std::int64_t{0}) == interior);
            CHECK(report.max_betweenness == *std::max_element(report.counts.begin(), report.counts.end()));
            CHECK(streamed_betweenness(g, spec, 1).counts == report.counts);
            CHECK(streamed_betweenness(g, spec, 3).counts == report.counts);
        }
    }
}

TEST_CASE("threshold predictions") {
    const auto s5 = route_betweenness(shortest_path_routes(star_graph(5), 1));
    CHECK(predict_gamma_c(s5, PredictionMode::paper) == doctest::Approx(1.0 / 3.0));
    CHECK(predict_gamma_c(s5, PredictionMode::exact) == 0.25);
    const auto p3 = route_betweenness(shortest_path_routes(path_graph(3), 1));
    CHECK(predict_gamma_c(p3, PredictionMode::paper) == 1.0);
    CHECK(predict_gamma_c(route_betweenness(shortest_path_routes(complete_graph(4), 1)), PredictionMode::paper) == 1.0);

    double prev_paper = 2.0;
    double prev_exact = 2.0;
    for (std::int64_t b = 0; b < 400; b += 3) {
        std::vector<std::int64_t> counts(100, 0);
        counts[5] = b;
        const auto r = BetweennessReport::from_counts(counts);
        const double paper = predict_gamma_c(r, PredictionMode::paper);
        const double exact = predict_gamma_c(r, PredictionMode::exact);
        CHECK(paper <= prev_paper);
        CHECK(exact <= prev_exact);
        CHECK(exact > 0.0);
        CHECK(exact <= paper);
        prev_paper = paper;
        prev_exact = exact;
    }
}

TEST_CASE("betweenness CSV and route dump") {
    const RouteSpec spec{Protocol::hub_avoidance, 0.01, 4};
    const auto t = build_routes(star_graph(5), spec);
    std::ostringstream csv;
    write_betweenness_csv(route_betweenness(t), spec, csv);
    CHECK(csv.str().rfind("# B=12 argmax=0 N=5 protocol=HA seed=4", 0) == 0);
    CHECK(csv.str().find("node_id,b\n0,12\n1,0\n") != std::string::npos);

    std::ostringstream dump;
    write_route_dump(t, dump);
    const std::string text = dump.str();
    CHECK(text.find("1 2 1 0 2\n") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 20);
}
