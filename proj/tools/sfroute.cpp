// Command-line front end: graph generation, routing, dynamics, studies and
// small-graph bounds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfroute/bounds.hpp"
#include "sfroute/dynamics.hpp"
#include "sfroute/graph.hpp"
#include "sfroute/harness.hpp"
#include "sfroute/routing.hpp"
#include "sfroute/version.hpp"

namespace fs = std::filesystem;
using namespace sfroute;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Bad input from the user: flags, config, input files.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int workers = 0;
};

// Flag values that were not given stay unset so that config keys survive.
struct Overrides {
    std::vector<NodeId> n_list;
    double lambda = 0.0;
    int k_min = 0;
    std::string cutoff;
    std::vector<std::string> protocols;
    double ha_fraction = -1.0;
    std::vector<double> gamma_grid;
    std::int64_t t_warm = -1;
    std::int64_t t_meas = -1;
    int replicas = 0;
    std::string graph_file;
};

ExperimentConfig resolve_config(const CLI::App& sub, const Common& common, const Overrides& o) {
    ExperimentConfig c = common.config.empty() ? ExperimentConfig{} : load_config(common.config);
    auto given = [&](const char* name) {
        for (const CLI::App* app : {&sub, sub.get_parent()}) {
            const CLI::Option* opt = app->get_option_no_throw(name);
            if (opt != nullptr && opt->count() > 0) {
                return true;
            }
        }
        return false;
    };
    if (given("--seed")) c.seed = common.seed;
    if (given("--workers")) c.workers = common.workers;
    if (given("--out")) c.out = common.out;
    if (given("--n")) c.n_list = o.n_list;
    if (given("--lambda")) c.lambda = o.lambda;
    if (given("--k-min")) c.k_min = o.k_min;
    if (given("--cutoff")) {
        // Reuse the config parser so the flag accepts exactly what the key does.
        const std::string quoted = o.cutoff == "sqrt" || o.cutoff == "none" ? "\"" + o.cutoff + "\"" : o.cutoff;
        const auto parsed = parse_config("{\"cutoff\": " + quoted + "}");
        c.cutoff = parsed.cutoff;
        c.k_max = parsed.k_max;
    }
    if (given("--protocol")) {
        c.protocols.clear();
        for (const auto& p : o.protocols) {
            try {
                c.protocols.push_back(parse_protocol(p));
            } catch (const std::exception& e) {
                throw ValidationError(e.what());
            }
        }
    }
    if (given("--ha-fraction")) c.ha_fraction = o.ha_fraction;
    if (given("--gamma")) c.gamma_grid = o.gamma_grid;
    if (given("--t-warm")) c.t_warm = o.t_warm;
    if (given("--t-meas")) c.t_meas = o.t_meas;
    if (given("--replicas")) c.replicas = o.replicas;
    if (given("--graph")) c.graph_file = o.graph_file;
    return c;
}

Graph load_graph(const std::string& path) {
    try {
        return load_edge_list(path);
    } catch (const GraphError& e) {
        throw ValidationError(e.what());
    }
}

// Writes to the named file, or to stdout for an empty path or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            if (fs::path(path).has_parent_path()) {
                fs::create_directories(fs::path(path).parent_path());
            }
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) {
                throw std::runtime_error("cannot write " + path);
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

fs::path study_file(const ExperimentConfig& c, const char* name) {
    fs::create_directories(c.out);
    return fs::path(c.out) / name;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

void add_model_flags(CLI::App* sub, Overrides& o) {
    sub->add_option("--n", o.n_list, "Node count(s)");
    sub->add_option("--lambda", o.lambda, "Degree exponent, > 2");
    sub->add_option("--k-min", o.k_min, "Minimum degree");
    sub->add_option("--cutoff", o.cutoff, "Maximum degree: sqrt, none or an integer");
}

int run_generate(const CLI::App& sub, const Common& common, const Overrides& o) {
    const auto c = resolve_config(sub, common, o);
    if (c.n_list.size() != 1) {
        throw ValidationError("generate takes exactly one N");
    }
    const NodeId n = c.n_list.front();
    if (n < 2) {
        throw ValidationError("N must be at least 2");
    }
    const int k_max = c.k_max_for(n);
    if (!(c.lambda > 2.0) || c.k_min < 1 || k_max < c.k_min || k_max > n - 1) {
        throw ValidationError("degree range [" + std::to_string(c.k_min) + ", " + std::to_string(k_max) +
                              "] or lambda invalid for N=" + std::to_string(n));
    }
    const auto gen = generate_graph(n, c.lambda, c.k_min, k_max, c.seed, c.max_restarts, c.generation_attempts);
    Output out(common.out);
    out.stream() << "# sfroute " << kVersion << " generate N=" << n << " realized_N=" << gen.graph.node_count()
                 << " lambda=" << format_real(c.lambda) << " k_min=" << c.k_min << " k_max=" << k_max
                 << " seed=" << c.seed << "\n";
    write_edge_list(gen.graph, out.stream());
    return 0;
}

struct RouteFlags {
    std::string graph;
    std::string dump;
};

RouteSpec route_spec(const ExperimentConfig& c) {
    if (c.protocols.size() != 1) {
        throw ValidationError("exactly one protocol expected");
    }
    if (!(c.ha_fraction >= 0.0 && c.ha_fraction < 1.0)) {
        throw ValidationError("ha_fraction must lie in [0, 1)");
    }
    const Protocol p = c.protocols.front();
    return RouteSpec{p, p == Protocol::hub_avoidance ? c.ha_fraction : 0.0, c.seed};
}

// Config files usually list both protocols; single-table commands then
// default to SP.
void default_to_single_protocol(ExperimentConfig& c) {
    if (c.protocols.size() != 1) {
        c.protocols = {Protocol::shortest_path};
    }
}

int run_route(const CLI::App& sub, const Common& common, const Overrides& o, const RouteFlags& f) {
    auto c = resolve_config(sub, common, o);
    if (sub.count("--protocol") == 0) {
        default_to_single_protocol(c);
    }
    const Graph g = load_graph(f.graph);
    const RouteSpec spec = route_spec(c);
    Output out(common.out);
    if (f.dump.empty()) {
        write_betweenness_csv(streamed_betweenness(g, spec, c.workers), spec, out.stream());
    } else {
        const RouteTable routes = build_routes(g, spec);
        write_betweenness_csv(route_betweenness(routes), spec, out.stream());
        Output dump(f.dump);
        write_route_dump(routes, dump.stream());
    }
    return 0;
}

struct SimulateFlags {
    std::string graph;
    std::string trace;
};

int run_simulate(const CLI::App& sub, const Common& common, const Overrides& o, const SimulateFlags& f) {
    auto c = resolve_config(sub, common, o);
    if (sub.count("--protocol") == 0) {
        default_to_single_protocol(c);
    }
    if (c.gamma_grid.size() != 1) {
        throw ValidationError("simulate takes exactly one --gamma");
    }
    const double gamma = c.gamma_grid.front();
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("gamma must lie in [0, 1]");
    }
    if (c.t_warm < 0 || c.t_meas < 1) {
        throw ValidationError("horizons require t_warm >= 0 and t_meas >= 1");
    }
    const Graph g = load_graph(f.graph);
    const RouteSpec spec = route_spec(c);
    const RouteTable routes = build_routes(g, spec);
    const std::uint64_t sim_seed = derive_seed(c.seed, 0x73);

    std::unique_ptr<Output> trace;
    std::function<void(const TraceRow&)> on_row;
    if (!f.trace.empty()) {
        trace = std::make_unique<Output>(f.trace);
        write_trace_header(trace->stream());
        on_row = [&](const TraceRow& row) { write_trace_row(row, trace->stream()); };
    }
    const auto est = run_simulation(g, routes, gamma, SimulationParams{c.t_warm, c.t_meas, false}, sim_seed, on_row);

    Output out(common.out);
    out.stream() << "# sfroute " << kVersion << " simulate protocol=" << protocol_name(spec.protocol)
                 << " N=" << g.node_count() << " route_seed=" << spec.seed << "\n";
    out.stream() << "gamma,theta,t_warm,t_meas,seed\n"
                 << format_real(est.gamma) << "," << format_real(est.theta) << "," << est.t_warm << ","
                 << est.t_meas << "," << est.seed << "\n";
    return 0;
}

int run_scan(const CLI::App& sub, const Common& common, const Overrides& o) {
    const auto c = resolve_config(sub, common, o);
    StudyMetadata meta;
    const auto rows = scan_gamma(c, &meta);
    std::ostringstream text;
    write_scan_csv(rows, c, meta, text);
    const auto path = study_file(c, "scan.csv");
    write_file(path, text.str());
    std::cerr << "wrote " << rows.size() << " rows to " << path.string() << "\n";
    return 0;
}

int run_scaling(const CLI::App& sub, const Common& common, const Overrides& o) {
    const auto c = resolve_config(sub, common, o);
    StudyMetadata meta;
    const auto rows = scaling_study(c, &meta);
    std::ostringstream text;
    write_scaling_csv(rows, c, meta, text);
    const auto path = study_file(c, "scaling.csv");
    write_file(path, text.str());
    std::cerr << "wrote " << rows.size() << " rows to " << path.string() << "\n";
    return 0;
}

int run_fit(const Common& common, const std::string& input) {
    std::ifstream in(input);
    if (!in) {
        throw ValidationError("cannot open " + input);
    }
    std::vector<ScalingPoint> points;
    try {
        points = read_scaling_csv(in);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    std::map<std::string, std::vector<std::pair<double, double>>> by_protocol;
    for (const auto& p : points) {
        by_protocol[p.protocol].emplace_back(p.n, p.b);
    }
    if (by_protocol.empty()) {
        throw ValidationError(input + " has no data rows");
    }
    std::ostringstream text;
    text << "protocol,slope,intercept,r_squared,points\n";
    for (const auto& [protocol, rows] : by_protocol) {
        FitResult f;
        try {
            f = fit_exponent(rows);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(protocol + ": " + e.what());
        }
        text << protocol << "," << format_real(f.slope) << "," << format_real(f.intercept) << ","
             << format_real(f.r_squared) << "," << f.points << "\n";
    }
    Output out(common.out);
    out.stream() << text.str();
    return 0;
}

int run_bounds(const Common& common, const std::vector<std::string>& graphs, NodeId limit) {
    Output out(common.out);
    write_bounds_csv_header(out.stream());
    for (const auto& path : graphs) {
        const Graph g = load_graph(path);
        if (g.node_count() > limit) {
            throw ValidationError(path + ": N=" + std::to_string(g.node_count()) + " exceeds the enumeration limit " +
                                  std::to_string(limit) + "; raise --limit at exponential cost");
        }
        if (!g.is_connected()) {
            throw ValidationError(path + ": graph is disconnected");
        }
        const auto label = fs::path(path).stem().string();
        write_bounds_csv_row(label, g.node_count(), min_sparsity_separator(g, limit), edge_expansion(g, limit),
                             out.stream());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Routing and congestion on scale-free networks"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kVersion));

    Common common;
    app.add_option("--config", common.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", common.out, "Output file, or output directory for scan and scaling");
    app.add_option("--seed", common.seed, "Master seed");
    app.add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);

    Overrides o;

    auto* generate = app.add_subcommand("generate", "Generate a configuration-model graph as an edge list");
    add_model_flags(generate, o);

    RouteFlags route_flags;
    auto* route = app.add_subcommand("route", "Build a route table and report its betweenness");
    route->add_option("--graph", route_flags.graph, "Edge list")->required()->check(CLI::ExistingFile);
    route->add_option("--protocol", o.protocols, "SP or HA")->expected(1);
    route->add_option("--ha-fraction", o.ha_fraction, "Fraction of hubs removed by HA");
    route->add_option("--dump", route_flags.dump, "Also write every route to this file");

    SimulateFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "Run the packet dynamics at one injection rate");
    simulate->add_option("--graph", sim_flags.graph, "Edge list")->required()->check(CLI::ExistingFile);
    simulate->add_option("--protocol", o.protocols, "SP or HA")->expected(1);
    simulate->add_option("--ha-fraction", o.ha_fraction, "Fraction of hubs removed by HA");
    simulate->add_option("--gamma", o.gamma_grid, "Injection rate")->required()->expected(1);
    simulate->add_option("--t-warm", o.t_warm, "Warmup steps");
    simulate->add_option("--t-meas", o.t_meas, "Measurement steps");
    simulate->add_option("--trace", sim_flags.trace, "Per-step trace CSV");

    auto* scan = app.add_subcommand("scan", "Sweep the injection rate and record theta");
    add_model_flags(scan, o);
    scan->add_option("--protocol", o.protocols, "SP and/or HA");
    scan->add_option("--ha-fraction", o.ha_fraction, "Fraction of hubs removed by HA");
    scan->add_option("--gamma", o.gamma_grid, "Injection rate grid");
    scan->add_option("--t-warm", o.t_warm, "Warmup steps");
    scan->add_option("--t-meas", o.t_meas, "Measurement steps");
    scan->add_option("--replicas", o.replicas, "Replicas");
    scan->add_option("--graph", o.graph_file, "Use this edge list instead of generating graphs");

    auto* scaling = app.add_subcommand("scaling", "Maximal betweenness against N");
    add_model_flags(scaling, o);
    scaling->add_option("--protocol", o.protocols, "SP and/or HA");
    scaling->add_option("--ha-fraction", o.ha_fraction, "Fraction of hubs removed by HA");
    scaling->add_option("--replicas", o.replicas, "Replicas");

    std::string fit_input;
    auto* fit = app.add_subcommand("fit", "Fit B ~ N^slope per protocol from a scaling CSV");
    fit->add_option("input", fit_input, "Scaling CSV")->required()->check(CLI::ExistingFile);

    std::vector<std::string> bound_graphs;
    NodeId limit = kDefaultEnumerationLimit;
    auto* bounds = app.add_subcommand("bounds", "Exact separator and edge expansion of small graphs");
    bounds->add_option("graphs", bound_graphs, "Edge lists")->required()->check(CLI::ExistingFile);
    bounds->add_option("--limit", limit, "Largest N to enumerate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*generate) return run_generate(*generate, common, o);
        if (*route) return run_route(*route, common, o, route_flags);
        if (*simulate) return run_simulate(*simulate, common, o, sim_flags);
        if (*scan) return run_scan(*scan, common, o);
        if (*scaling) return run_scaling(*scaling, common, o);
        if (*fit) return run_fit(common, fit_input);
        if (*bounds) return run_bounds(common, bound_graphs, limit);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
