#include "sfroute/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sfroute/parallel.hpp"
#include "sfroute/rng.hpp"
#include "sfroute/version.hpp"

namespace sfroute {

using json = nlohmann::json;

namespace {

// Stream tags keep graph, route and simulation seeds independent.
constexpr std::uint64_t kGraphStream = 0x67;
constexpr std::uint64_t kRouteStream = 0x72;
constexpr std::uint64_t kSimStream = 0x73;

const std::vector<std::string> kKnownKeys = {
    "n_list",  "lambda",   "k_min", "cutoff", "protocols",  "ha_fraction",  "gamma_grid",         "t_warm",
    "t_meas",  "replicas", "seed",  "out",    "workers",    "graph_file",   "max_restarts", "generation_attempts"};

template <typename T>
T get_as(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

int ExperimentConfig::k_max_for(NodeId n) const {
    switch (cutoff) {
        case CutoffPolicy::structural:
            return structural_cutoff(n);
        case CutoffPolicy::none:
            return n - 1;
        case CutoffPolicy::fixed:
            return k_max;
    }
    return n - 1;
}

ExperimentConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (const auto& item : doc.items()) {
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), item.key()) == kKnownKeys.end()) {
            throw ConfigError("unknown config key '" + item.key() + "'");
        }
    }

    ExperimentConfig c;
    if (doc.contains("n_list")) c.n_list = get_as<std::vector<NodeId>>(doc, "n_list");
    if (doc.contains("lambda")) c.lambda = get_as<double>(doc, "lambda");
    if (doc.contains("k_min")) c.k_min = get_as<int>(doc, "k_min");
    if (doc.contains("cutoff")) {
        const auto& v = doc["cutoff"];
        if (v.is_string() && v == "sqrt") {
            c.cutoff = CutoffPolicy::structural;
        } else if (v.is_string() && v == "none") {
            c.cutoff = CutoffPolicy::none;
        } else if (v.is_number_integer()) {
            c.cutoff = CutoffPolicy::fixed;
            c.k_max = v.get<int>();
        } else {
            throw ConfigError("config key 'cutoff' must be \"sqrt\", \"none\" or an integer");
        }
    }
    if (doc.contains("protocols")) {
        c.protocols.clear();
        for (const auto& name : get_as<std::vector<std::string>>(doc, "protocols")) {
            try {
                c.protocols.push_back(parse_protocol(name));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (doc.contains("ha_fraction")) c.ha_fraction = get_as<double>(doc, "ha_fraction");
    if (doc.contains("gamma_grid")) c.gamma_grid = get_as<std::vector<double>>(doc, "gamma_grid");
    if (doc.contains("t_warm")) c.t_warm = get_as<std::int64_t>(doc, "t_warm");
    if (doc.contains("t_meas")) c.t_meas = get_as<std::int64_t>(doc, "t_meas");
    if (doc.contains("replicas")) c.replicas = get_as<int>(doc, "replicas");
    if (doc.contains("seed")) c.seed = get_as<std::uint64_t>(doc, "seed");
    if (doc.contains("out")) c.out = get_as<std::string>(doc, "out");
    if (doc.contains("workers")) c.workers = get_as<int>(doc, "workers");
    if (doc.contains("graph_file")) c.graph_file = get_as<std::string>(doc, "graph_file");
    if (doc.contains("max_restarts")) c.max_restarts = get_as<int>(doc, "max_restarts");
    if (doc.contains("generation_attempts")) c.generation_attempts = get_as<int>(doc, "generation_attempts");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::stringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    // ordered_json keeps the key order fixed, so the embedded config is
    // byte-stable.
    nlohmann::ordered_json doc;
    doc["n_list"] = c.n_list;
    doc["lambda"] = c.lambda;
    doc["k_min"] = c.k_min;
    switch (c.cutoff) {
        case CutoffPolicy::structural: doc["cutoff"] = "sqrt"; break;
        case CutoffPolicy::none: doc["cutoff"] = "none"; break;
        case CutoffPolicy::fixed: doc["cutoff"] = c.k_max; break;
    }
    std::vector<std::string> names;
    for (auto p : c.protocols) {
        names.emplace_back(protocol_name(p));
    }
    doc["protocols"] = names;
    doc["ha_fraction"] = c.ha_fraction;
    doc["gamma_grid"] = c.gamma_grid;
    doc["t_warm"] = c.t_warm;
    doc["t_meas"] = c.t_meas;
    doc["replicas"] = c.replicas;
    doc["seed"] = c.seed;
    doc["out"] = c.out;
    doc["workers"] = c.workers;
    doc["graph_file"] = c.graph_file;
    doc["max_restarts"] = c.max_restarts;
    doc["generation_attempts"] = c.generation_attempts;
    return doc.dump();
}

void validate_config(const ExperimentConfig& c, StudyKind kind) {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (c.graph_file.empty()) {
        if (c.n_list.empty()) fail("n_list must not be empty");
        for (NodeId n : c.n_list) {
            if (n < 4) fail("every N in n_list must be at least 4");
        }
        if (!(c.lambda > 2.0)) fail("lambda must exceed 2");
        if (c.k_min < 1) fail("k_min must be at least 1");
        for (NodeId n : c.n_list) {
            const int k_max = c.k_max_for(n);
            if (k_max < c.k_min) fail("k_max " + std::to_string(k_max) + " below k_min at N=" + std::to_string(n));
            if (k_max > n - 1) fail("k_max " + std::to_string(k_max) + " exceeds N-1 at N=" + std::to_string(n));
        }
    } else if (kind == StudyKind::scaling) {
        fail("graph_file applies to scan only; scaling generates its own graphs");
    }
    if (c.protocols.empty()) fail("protocols must not be empty");
    if (!(c.ha_fraction >= 0.0 && c.ha_fraction < 1.0)) fail("ha_fraction must lie in [0, 1)");
    if (c.replicas < 1) fail("replicas must be at least 1");
    if (c.workers < 1) fail("workers must be at least 1");
    if (c.max_restarts < 0) fail("max_restarts must be non-negative");
    if (c.generation_attempts < 1) fail("generation_attempts must be at least 1");
    if (kind == StudyKind::scan) {
        if (c.graph_file.empty() && c.n_list.size() != 1) fail("scan takes exactly one N in n_list");
        if (c.graph_file.empty() && c.n_list.front() > 2000) fail("scan runs the dynamics only up to N = 2000");
        if (c.gamma_grid.empty()) fail("gamma_grid must not be empty");
        for (double g : c.gamma_grid) {
            if (!(g >= 0.0 && g <= 1.0)) fail("gamma grid values must lie in [0, 1]");
        }
        if (c.t_warm < 0) fail("t_warm must be non-negative");
        if (c.t_meas < 1) fail("t_meas must be at least 1");
    }
}

GeneratedGraph generate_graph(NodeId n, double lambda, int k_min, int k_max, std::uint64_t seed, int max_restarts,
                              int attempts) {
    const DegreeDistribution dist(lambda, k_min, k_max);
    GeneratedGraph out;
    out.nominal_n = n;
    std::string last_error;
    for (int a = 0; a < attempts; ++a) {
        const std::uint64_t attempt_seed = derive_seed(seed, static_cast<std::uint64_t>(a));
        try {
            const auto seq = sample_degree_sequence(n, dist, derive_seed(attempt_seed, 0));
            const auto g = build_configuration_model(seq, derive_seed(attempt_seed, 1), max_restarts);
            out.graph = largest_component(g).graph;
            out.seed = attempt_seed;
            return out;
        } catch (const GraphError& e) {
            ++out.failed_attempts;
            last_error = e.what();
        }
    }
    throw GraphError("graph generation failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

namespace {

std::uint64_t cell_seed(const ExperimentConfig& c, NodeId n, int replica) {
    return derive_seed(c.seed, kGraphStream, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replica));
}

}  // namespace

std::vector<ScanRow> scan_gamma(const ExperimentConfig& c, StudyMetadata* meta) {
    validate_config(c, StudyKind::scan);
    StudyMetadata local;
    StudyMetadata& md = meta ? *meta : local;

    std::optional<Graph> fixed;
    if (!c.graph_file.empty()) {
        fixed = load_edge_list(c.graph_file);
        if (fixed->node_count() > 2000) {
            throw ConfigError("scan runs the dynamics only up to N = 2000");
        }
        md.notes.push_back("graph_file N=" + std::to_string(fixed->node_count()));
    }

    const std::size_t per_table = c.gamma_grid.size();
    std::vector<ScanRow> rows;
    for (int r = 0; r < c.replicas; ++r) {
        Graph g;
        std::uint64_t base;
        if (fixed) {
            g = *fixed;
            base = derive_seed(c.seed, kGraphStream, 0, static_cast<std::uint64_t>(r));
        } else {
            const NodeId n = c.n_list.front();
            base = cell_seed(c, n, r);
            auto gen = generate_graph(n, c.lambda, c.k_min, c.k_max_for(n), base, c.max_restarts,
                                      c.generation_attempts);
            md.generation_failures += gen.failed_attempts;
            md.notes.push_back("replica " + std::to_string(r) + " N=" + std::to_string(n) +
                               " realized_N=" + std::to_string(gen.graph.node_count()));
            g = std::move(gen.graph);
        }
        for (std::size_t p = 0; p < c.protocols.size(); ++p) {
            const Protocol protocol = c.protocols[p];
            const RouteSpec spec{protocol, protocol == Protocol::hub_avoidance ? c.ha_fraction : 0.0,
                                 derive_seed(base, kRouteStream, static_cast<std::uint64_t>(protocol))};
            const RouteTable routes = build_routes(g, spec);
            std::vector<ScanRow> cells(per_table);
            parallel_for(per_table, c.workers, [&](std::size_t i) {
                const double gamma = c.gamma_grid[i];
                const std::uint64_t seed =
                    derive_seed(base, kSimStream, static_cast<std::uint64_t>(protocol), static_cast<std::uint64_t>(i));
                const auto est = run_simulation(g, routes, gamma, {c.t_warm, c.t_meas, false}, seed);
                cells[i] = {protocol, gamma, est.theta, r, seed};
            });
            rows.insert(rows.end(), cells.begin(), cells.end());
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const ScanRow& a, const ScanRow& b) {
        auto rank = [&](Protocol p) { return std::find(c.protocols.begin(), c.protocols.end(), p) - c.protocols.begin(); };
        if (rank(a.protocol) != rank(b.protocol)) return rank(a.protocol) < rank(b.protocol);
        if (a.gamma != b.gamma) return a.gamma < b.gamma;
        return a.replica < b.replica;
    });
    return rows;
}

std::vector<ScalingRow> scaling_study(const ExperimentConfig& c, StudyMetadata* meta) {
    validate_config(c, StudyKind::scaling);
    StudyMetadata local;
    StudyMetadata& md = meta ? *meta : local;

    struct Cell {
        NodeId n;
        int replica;
    };
    std::vector<Cell> cells;
    for (NodeId n : c.n_list) {
        for (int r = 0; r < c.replicas; ++r) {
            cells.push_back({n, r});
        }
    }

    std::vector<std::vector<ScalingRow>> results(cells.size());
    std::vector<int> failures(cells.size(), 0);
    parallel_for(cells.size(), c.workers, [&](std::size_t i) {
        const auto [n, r] = cells[i];
        const std::uint64_t base = cell_seed(c, n, r);
        auto gen = generate_graph(n, c.lambda, c.k_min, c.k_max_for(n), base, c.max_restarts, c.generation_attempts);
        failures[i] = gen.failed_attempts;
        const Graph& g = gen.graph;
        for (Protocol protocol : c.protocols) {
            const RouteSpec spec{protocol, protocol == Protocol::hub_avoidance ? c.ha_fraction : 0.0,
                                 derive_seed(base, kRouteStream, static_cast<std::uint64_t>(protocol))};
            const auto report = streamed_betweenness(g, spec);
            results[i].push_back({n, g.node_count(), protocol, r, report.max_betweenness,
                                  predict_gamma_c(report, PredictionMode::paper),
                                  predict_gamma_c(report, PredictionMode::exact), base});
        }
    });

    std::vector<ScalingRow> rows;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        md.generation_failures += failures[i];
        if (!results[i].empty()) {
            md.notes.push_back("N=" + std::to_string(cells[i].n) + " replica=" + std::to_string(cells[i].replica) +
                               " realized_N=" + std::to_string(results[i].front().realized_n));
        }
        rows.insert(rows.end(), results[i].begin(), results[i].end());
    }
    return rows;
}

ThetaCurve median_theta_curve(const std::vector<ScanRow>& rows, Protocol protocol) {
    std::map<double, std::vector<double>> by_gamma;
    for (const auto& r : rows) {
        if (r.protocol == protocol) {
            by_gamma[r.gamma].push_back(r.theta);
        }
    }
    ThetaCurve curve;
    for (auto& [gamma, thetas] : by_gamma) {
        curve.gamma.push_back(gamma);
        curve.theta.push_back(median(std::move(thetas)));
    }
    return curve;
}

double crossing_threshold(const ThetaCurve& curve, double epsilon) {
    if (curve.gamma.empty()) {
        throw std::invalid_argument("crossing_threshold: empty curve");
    }
    if (curve.theta.front() > epsilon) {
        return curve.gamma.front();
    }
    for (std::size_t i = 1; i < curve.gamma.size(); ++i) {
        if (curve.theta[i] > epsilon) {
            const double t0 = curve.theta[i - 1];
            const double t1 = curve.theta[i];
            const double g0 = curve.gamma[i - 1];
            const double g1 = curve.gamma[i];
            return g0 + (epsilon - t0) * (g1 - g0) / (t1 - t0);
        }
    }
    return curve.gamma.back();
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty set");
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

FitResult fit_exponent(std::span<const std::pair<double, double>> rows) {
    std::map<double, std::vector<double>> groups;
    for (const auto& [n, value] : rows) {
        if (!(n > 0.0) || !(value > 0.0)) {
            throw std::invalid_argument("fit_exponent: nonpositive entry (N=" + format_real(n) +
                                        ", value=" + format_real(value) + ")");
        }
        groups[n].push_back(value);
    }
    if (groups.size() < 3) {
        throw std::invalid_argument("fit_exponent: needs at least 3 distinct N values, got " +
                                    std::to_string(groups.size()));
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (auto& [n, values] : groups) {
        xs.push_back(std::log(n));
        ys.push_back(std::log(median(values)));
    }
    const auto k = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    FitResult f;
    f.points = xs.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    // A constant series is fit exactly by the horizontal line.
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void write_csv_preamble(const ExperimentConfig& config, const StudyMetadata& meta, std::ostream& out) {
    out << "# sfroute " << kVersion << "\n";
    out << "# config: " << config_to_json(config) << "\n";
    out << "# generation_failures: " << meta.generation_failures << "\n";
    for (const auto& note : meta.notes) {
        out << "# " << note << "\n";
    }
}

void write_scan_csv(const std::vector<ScanRow>& rows, const ExperimentConfig& config, const StudyMetadata& meta,
                    std::ostream& out) {
    write_csv_preamble(config, meta, out);
    out << "protocol,gamma,theta,replica,seed\n";
    for (const auto& r : rows) {
        out << protocol_name(r.protocol) << "," << format_real(r.gamma) << "," << format_real(r.theta) << ","
            << r.replica << "," << r.seed << "\n";
    }
}

void write_scaling_csv(const std::vector<ScalingRow>& rows, const ExperimentConfig& config,
                       const StudyMetadata& meta, std::ostream& out) {
    write_csv_preamble(config, meta, out);
    out << "N,protocol,replica,B,gamma_c_paper,gamma_c_exact,seed\n";
    for (const auto& r : rows) {
        out << r.n << "," << protocol_name(r.protocol) << "," << r.replica << "," << r.max_betweenness << ","
            << format_real(r.gamma_c_paper) << "," << format_real(r.gamma_c_exact) << "," << r.seed << "\n";
    }
}

std::vector<ScalingPoint> read_scaling_csv(std::istream& in) {
    std::vector<ScalingPoint> out;
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    int col_n = -1;
    int col_protocol = -1;
    int col_b = -1;
    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ',')) {
            fields.push_back(f);
        }
        return fields;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto fields = split(line);
        if (!header_seen) {
            for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
                if (fields[i] == "N") col_n = i;
                if (fields[i] == "protocol") col_protocol = i;
                if (fields[i] == "B") col_b = i;
            }
            if (col_n < 0 || col_protocol < 0 || col_b < 0) {
                throw std::invalid_argument("scaling CSV header lacks one of N, protocol, B");
            }
            header_seen = true;
            continue;
        }
        const int needed = std::max({col_n, col_protocol, col_b});
        if (static_cast<int>(fields.size()) <= needed) {
            throw std::invalid_argument("scaling CSV line " + std::to_string(line_no) + ": too few fields");
        }
        try {
            out.push_back({fields[col_protocol], std::stod(fields[col_n]), std::stod(fields[col_b])});
        } catch (const std::exception&) {
            throw std::invalid_argument("scaling CSV line " + std::to_string(line_no) + ": non-numeric field");
        }
    }
    if (!header_seen) {
        throw std::invalid_argument("scaling CSV has no header row");
    }
    return out;
}

}  // namespace sfroute
