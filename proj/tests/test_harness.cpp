#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sfroute/graph.hpp"
#include "sfroute/harness.hpp"

using namespace sfroute;

namespace {

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "sfroute_test_harness";
    std::filesystem::create_directories(dir);
    return dir;
}

ExperimentConfig star_scan_config(const std::vector<double>& grid) {
    const auto path = scratch_dir() / "s5.txt";
    save_edge_list(star_graph(5), path);
    ExperimentConfig c;
    c.graph_file = path.string();
    c.protocols = {Protocol::shortest_path};
    c.gamma_grid = grid;
    c.replicas = 1;
    return c;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config(R"({"n_list": [300], "cutoff": 12, "protocols": ["HA"], "gamma_grid": [0.1, 0.2],
                                    "seed": 9, "t_meas": 100})");
    CHECK(c.n_list == std::vector<NodeId>{300});
    CHECK(c.cutoff == CutoffPolicy::fixed);
    CHECK(c.k_max_for(300) == 12);
    CHECK(c.protocols == std::vector<Protocol>{Protocol::hub_avoidance});
    CHECK(c.seed == 9);
    CHECK(c.t_meas == 100);
    CHECK(c.lambda == 2.5);

    CHECK(parse_config(R"({"cutoff": "none"})").k_max_for(300) == 299);
    CHECK(parse_config(R"({"cutoff": "sqrt"})").k_max_for(300) == 17);
    CHECK(parse_config(R"({"cutoff": "sqrt", "lambda": 3.5})").k_max_for(300) == 17);

    CHECK_THROWS_AS(parse_config(R"({"n_lsit": [300]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"lambda": "big"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"cutoff": "log"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"protocols": ["XY"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(load_config(scratch_dir() / "absent.json"), ConfigError);
}

TEST_CASE("config JSON survives a reparse") {
    ExperimentConfig c;
    c.n_list = {100, 200};
    c.cutoff = CutoffPolicy::fixed;
    c.k_max = 9;
    c.gamma_grid = {0.0, 0.125};
    const auto text = config_to_json(c);
    CHECK(config_to_json(parse_config(text)) == text);
    CHECK(text.rfind("{\"n_list\":[100,200]", 0) == 0);
}

TEST_CASE("config validation") {
    ExperimentConfig scan;
    scan.n_list = {500};
    scan.gamma_grid = {0.1};
    CHECK_NOTHROW(validate_config(scan, StudyKind::scan));

    auto bad = scan;
    bad.n_list = {500, 1000};
    CHECK_THROWS_AS(validate_config(bad, StudyKind::scan), ConfigError);
    bad = scan;
    bad.n_list = {4000};
    CHECK_THROWS_AS(validate_config(bad, StudyKind::scan), ConfigError);
    bad = scan;
    bad.gamma_grid = {1.5};
    CHECK_THROWS_AS(validate_config(bad, StudyKind::scan), ConfigError);
    bad = scan;
    bad.gamma_grid.clear();
    CHECK_THROWS_AS(validate_config(bad, StudyKind::scan), ConfigError);
    bad = scan;
    bad.lambda = 2.0;
    CHECK_THROWS_AS(validate_config(bad, StudyKind::scan), ConfigError);
    bad = scan;
    bad.ha_fraction = 1.0;
    CHECK_THROWS_AS(validate_config(bad, StudyKind::scan), ConfigError);
    bad = scan;
    bad.cutoff = CutoffPolicy::fixed;
    bad.k_max = 2;
    CHECK_THROWS_AS(validate_config(bad, StudyKind::scan), ConfigError);

    ExperimentConfig scaling;
    CHECK_NOTHROW(validate_config(scaling, StudyKind::scaling));
    scaling.graph_file = "g.txt";
    CHECK_THROWS_AS(validate_config(scaling, StudyKind::scaling), ConfigError);
}

TEST_CASE("graph generation records the realized size") {
    const auto a = generate_graph(300, 2.5, 2, 17, 4, 1000, 5);
    const auto b = generate_graph(300, 2.5, 2, 17, 4, 1000, 5);
    CHECK(a.graph == b.graph);
    CHECK(a.graph.is_connected());
    CHECK(a.graph.node_count() <= 300);
    CHECK(a.nominal_n == 300);
}

TEST_CASE("scan on the star") {
    SUBCASE("gamma 0 gives theta 0") {
        auto c = star_scan_config({0.0});
        c.protocols = {Protocol::shortest_path, Protocol::hub_avoidance};
        for (const auto& row : scan_gamma(c)) {
            CHECK(row.theta == 0.0);
        }
    }
    SUBCASE("grid 0.1, 0.5") {
        const auto rows = scan_gamma(star_scan_config({0.5, 0.1}));
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].gamma == 0.1);
        CHECK(std::abs(rows[0].theta) <= 0.02);
        CHECK(rows[1].theta == doctest::Approx(0.4).epsilon(0.125));
    }
}

TEST_CASE("scan rows do not depend on worker count") {
    ExperimentConfig c;
    c.n_list = {120};
    c.gamma_grid = {0.05, 0.1, 0.2, 0.3};
    c.replicas = 2;
    c.t_warm = 100;
    c.t_meas = 200;
    c.seed = 3;
    const auto one = scan_gamma(c);
    c.workers = 3;
    const auto three = scan_gamma(c);
    REQUIRE(one.size() == 16);
    REQUIRE(three.size() == one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].theta == three[i].theta);
        CHECK(one[i].seed == three[i].seed);
    }
    // A grid point's theta does not depend on its neighbors in the grid.
    c.gamma_grid = {0.2};
    const auto single = scan_gamma(c);
    CHECK(single.front().gamma == 0.2);
}

TEST_CASE("scaling study shape and agreement with direct computation") {
    ExperimentConfig c;
    c.n_list = {150};
    c.replicas = 1;
    c.seed = 8;
    StudyMetadata meta;
    const auto rows = scaling_study(c, &meta);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].protocol == Protocol::shortest_path);
    CHECK(rows[1].protocol == Protocol::hub_avoidance);
    for (const auto& r : rows) {
        CHECK(r.n == 150);
        CHECK(r.realized_n <= 150);
        CHECK(r.max_betweenness >= 0);
        CHECK(r.gamma_c_paper > 0.0);
        CHECK(r.gamma_c_paper <= 1.0);
        CHECK(r.gamma_c_exact <= r.gamma_c_paper);
        CHECK(r.gamma_c_exact == doctest::Approx(static_cast<double>(r.realized_n - 1) /
                                                 static_cast<double>(r.max_betweenness + r.realized_n - 1)));
    }
    CHECK_FALSE(meta.notes.empty());
}

TEST_CASE("exponent fits") {
    const std::vector<std::pair<double, double>> square{{10, 100}, {100, 1e4}, {1000, 1e6}};
    const auto f = fit_exponent(square);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.points == 3);

    const std::vector<std::pair<double, double>> flat{{10, 5}, {100, 5}, {1000, 5}};
    CHECK(std::abs(fit_exponent(flat).slope) < 1e-12);

    // Medians per N: the outliers at N=100 must not move the fit.
    const std::vector<std::pair<double, double>> noisy{{10, 10}, {100, 1}, {100, 100}, {100, 1e6}, {1000, 1000}};
    CHECK(fit_exponent(noisy).slope == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<std::pair<double, double>> two{{10, 1}, {100, 2}};
    CHECK_THROWS_AS(fit_exponent(two), std::invalid_argument);
    const std::vector<std::pair<double, double>> zero{{10, 1}, {100, 0}, {1000, 3}};
    CHECK_THROWS_AS(fit_exponent(zero), std::invalid_argument);
}

TEST_CASE("theta curves and crossings") {
    const std::vector<ScanRow> rows{
        {Protocol::shortest_path, 0.2, 0.10, 0, 0}, {Protocol::shortest_path, 0.1, 0.00, 0, 0},
        {Protocol::shortest_path, 0.2, 0.30, 1, 0}, {Protocol::shortest_path, 0.1, 0.02, 1, 0},
        {Protocol::shortest_path, 0.2, 0.20, 2, 0}, {Protocol::shortest_path, 0.1, 0.01, 2, 0},
        {Protocol::hub_avoidance, 0.1, 0.50, 0, 0},
    };
    const auto curve = median_theta_curve(rows, Protocol::shortest_path);
    CHECK(curve.gamma == std::vector<double>{0.1, 0.2});
    CHECK(curve.theta == std::vector<double>{0.01, 0.20});
    CHECK(crossing_threshold(curve, 0.105) == doctest::Approx(0.15));
    CHECK(crossing_threshold(curve, 0.001) == 0.1);
    CHECK(crossing_threshold(curve, 0.5) == 0.2);
}

TEST_CASE("CSV output is deterministic and carries the config") {
    auto c = star_scan_config({0.3, 0.1});
    c.t_warm = 50;
    c.t_meas = 100;
    auto render = [&] {
        StudyMetadata meta;
        const auto rows = scan_gamma(c, &meta);
        std::ostringstream out;
        write_scan_csv(rows, c, meta, out);
        return out.str();
    };
    const auto text = render();
    CHECK(text == render());
    CHECK(text.rfind("# sfroute ", 0) == 0);
    CHECK(text.find("# config: " + config_to_json(c) + "\n") != std::string::npos);
    CHECK(text.find("\nprotocol,gamma,theta,replica,seed\nSP,0.1,") != std::string::npos);
}

TEST_CASE("scaling CSV round-trips through the reader") {
    ExperimentConfig c;
    const std::vector<ScalingRow> rows{{250, 248, Protocol::shortest_path, 0, 1200, 0.2, 0.17, 5},
                                       {250, 248, Protocol::hub_avoidance, 0, 900, 0.27, 0.22, 6}};
    std::ostringstream out;
    write_scaling_csv(rows, c, StudyMetadata{}, out);
    CHECK(out.str().find("N,protocol,replica,B,gamma_c_paper,gamma_c_exact,seed\n250,SP,0,1200,") !=
          std::string::npos);
    std::istringstream in(out.str());
    const auto points = read_scaling_csv(in);
    REQUIRE(points.size() == 2);
    CHECK(points[1].protocol == "HA");
    CHECK(points[1].n == 250.0);
    CHECK(points[1].b == 900.0);

    std::istringstream broken("N,protocol\n250,SP\n");
    CHECK_THROWS(read_scaling_csv(broken));
}

TEST_CASE("median") {
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 2, 3}) == 2.5);
    CHECK_THROWS(median({}));
}
