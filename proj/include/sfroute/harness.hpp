#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfroute/dynamics.hpp"
#include "sfroute/graph.hpp"
#include "sfroute/routing.hpp"

namespace sfroute {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CutoffPolicy { structural, none, fixed };

struct ExperimentConfig {
    std::vector<NodeId> n_list{250, 500, 1000, 2000, 4000};
    double lambda = 2.5;
    int k_min = 3;
    CutoffPolicy cutoff = CutoffPolicy::structural;
    int k_max = 0;  // used with CutoffPolicy::fixed
    std::vector<Protocol> protocols{Protocol::shortest_path, Protocol::hub_avoidance};
    double ha_fraction = 0.01;
    std::vector<double> gamma_grid;
    std::int64_t t_warm = 1000;
    std::int64_t t_meas = 5000;
    int replicas = 10;
    std::uint64_t seed = 1;
    std::string out = ".";
    int workers = 1;
    std::string graph_file;  // scan only: use this graph instead of generating
    int max_restarts = 1000;
    int generation_attempts = 10;

    int k_max_for(NodeId n) const;
};

// Parses the JSON config document. Unknown keys and out-of-domain values
// raise ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

enum class StudyKind { scan, scaling };
void validate_config(const ExperimentConfig& config, StudyKind kind);

struct GeneratedGraph {
    Graph graph;  // largest component, relabeled
    NodeId nominal_n = 0;
    std::uint64_t seed = 0;  // seed of the successful attempt
    int failed_attempts = 0;
};

// Degree sequence, configuration model and largest-component extraction.
// A failed attempt moves on to the next seed derived from `seed`.
GeneratedGraph generate_graph(NodeId n, double lambda, int k_min, int k_max, std::uint64_t seed, int max_restarts,
                              int attempts);

struct ScanRow {
    Protocol protocol;
    double gamma;
    double theta;
    int replica;
    std::uint64_t seed;
};

struct ScalingRow {
    NodeId n;  // nominal size, the grouping key for fits
    NodeId realized_n;
    Protocol protocol;
    int replica;
    std::int64_t max_betweenness;
    double gamma_c_paper;
    double gamma_c_exact;
    std::uint64_t seed;
};

struct StudyMetadata {
    int generation_failures = 0;
    std::vector<std::string> notes;
};

std::vector<ScanRow> scan_gamma(const ExperimentConfig& config, StudyMetadata* meta = nullptr);
std::vector<ScalingRow> scaling_study(const ExperimentConfig& config, StudyMetadata* meta = nullptr);

struct ThetaCurve {
    std::vector<double> gamma;
    std::vector<double> theta;
};

// Per-gamma median of theta over replicas, gamma ascending.
ThetaCurve median_theta_curve(const std::vector<ScanRow>& rows, Protocol protocol);

// First upward crossing of epsilon, interpolated linearly between grid
// points. The first grid value if the curve starts above epsilon, the last
// one if it never gets there.
double crossing_threshold(const ThetaCurve& curve, double epsilon);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;  // natural-log intercept
    double r_squared = 0.0;
    std::size_t points = 0;  // distinct N after median aggregation
};

// Median per N, then least squares on (log N, log value).
FitResult fit_exponent(std::span<const std::pair<double, double>> rows);

double median(std::vector<double> values);

// Formatting used for every floating-point CSV field.
std::string format_real(double x);

void write_csv_preamble(const ExperimentConfig& config, const StudyMetadata& meta, std::ostream& out);
void write_scan_csv(const std::vector<ScanRow>& rows, const ExperimentConfig& config, const StudyMetadata& meta,
                    std::ostream& out);
void write_scaling_csv(const std::vector<ScalingRow>& rows, const ExperimentConfig& config,
                       const StudyMetadata& meta, std::ostream& out);

// Reads a scaling CSV back as (protocol, N, B) triples.
struct ScalingPoint {
    std::string protocol;
    double n;
    double b;
};
std::vector<ScalingPoint> read_scaling_csv(std::istream& in);

}  // namespace sfroute
