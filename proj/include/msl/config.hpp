#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msl/criteria.hpp"
#include "msl/families.hpp"
#include "msl/grid.hpp"
#include "msl/solver.hpp"
#include "msl/variation.hpp"

namespace msl {

/// Parse or validation failure; the message names the field path and, for
/// YAML input, the source line.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

struct GridSpec {
    int n = 2;
    std::vector<Interval> extents;  // defaults to [0, 1] per axis
    std::vector<int> counts;        // defaults to 33 per axis
};

struct AnalyzeConfig {
    int refinement_levels = 0;  // convergence / eigenvalue-vs-h tables when > 0
    bool stability = true;
};

struct HomotopyConfig {
    int t_count = 33;
    int init_count = 4;
    double bump_amplitude = 0.1;   // uniqueness initial perturbations
    double endpoint_bump = 0.05;   // profile endpoint f1 = f0 + bump
    double uniq_tol = 1e-7;
    double convexity_tol = 1e-9;
};

struct OracleConfig {
    std::int64_t samples = 100000;
    std::vector<int> n_values{2, 3, 4};
    std::vector<int> p_values{2, 3, 4};
    double lambda_hi = 1.0;
    bool row_slack = false;
    double threshold = 1e-12;
    double search_lambda_hi = 2.0;
    std::int64_t search_budget = 20000;
};

struct SweepConfig {
    double s_max = 0.5;
    int steps = 5;
    bool stability = true;
};

struct RunConfig {
    std::string command = "validate";
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    GridSpec grid;
    BoundarySpec boundary;
    SolverConfig solver;
    EigenConfig eigen;
    CriteriaConfig criteria;
    AnalyzeConfig analyze;
    HomotopyConfig homotopy;
    OracleConfig oracle;
    SweepConfig sweep;

    GridPtr build() const;
};

/// `format` is "yaml" or "json".
RunConfig parse_config(const std::string& text, const std::string& format);
/// Format chosen by extension: .json is JSON, anything else YAML.
RunConfig load_config(const std::string& path);

/// Fully resolved config, defaults included.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace msl
