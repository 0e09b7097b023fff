#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msl/grid.hpp"
#include "msl/solver.hpp"

namespace msl {

class BoundaryMismatch : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// f_t = f0 + t (f1 - f0) at uniformly spaced t; boundary nodes hold f0's
/// values bit for bit.
struct HomotopyFamily {
    std::vector<double> t;
    std::vector<GridMap> maps;
    GridMap variation;  // f1 - f0, interior only
};

/// Throws BoundaryMismatch when the endpoints differ on the boundary by more
/// than 1e-12, InvalidInput when t_count < 3.
HomotopyFamily linear_homotopy(const GridMap& f0, const GridMap& f1, int t_count = 33);

struct HomotopyProfile {
    std::vector<double> t;
    std::vector<double> areas;
    /// Central second differences divided by dt^2, NaN at both ends.
    std::vector<double> d2area;
    double d_area_start = 0.0;  // one-sided second-order estimates of A'(0), A'(1)
    double d_area_end = 0.0;
    std::vector<double> sup_lambda_max;  // interior nodes, per t
    double endpoint_lambda_max = 0.0;    // max over the two endpoints
    double lambda_propagation_defect = 0.0;  // max of s(J_t) - ((1-t) s(J_0) + t s(J_1)), per node
    bool all_distance_decreasing = false;
    double scale = 1.0;          // max(1, max |A(t)|)
    double min_d2area = 0.0;     // min of d2area / scale
    double area_variation = 0.0; // (max A - min A) / scale
    double tol = 1e-9;
    bool convex = true;
};

HomotopyProfile area_profile(const HomotopyFamily& family, double tol = 1e-9);

struct JacobiConvexity {
    double worst_second_difference = 0.0;  // min over t, node, axis of d2|J_i|^2 / dt^2
    double max_defect = 0.0;   // max | d2|J_i|^2/dt^2 - 2 |d_i V|^2 | / (1 + |J_i(0)|^2 + |J_i(1)|^2)
    double endpoint_excess = 0.0;  // max of |J_i(t)| - max(|J_i(0)|, |J_i(1)|)
    bool passes = true;
};

JacobiConvexity jacobi_norm_convexity(const HomotopyFamily& family, double tol = 1e-10);

struct UniquenessConfig {
    int init_count = 4;
    std::uint64_t seed = 1;
    double bump_amplitude = 0.1;
    double uniq_tol = 1e-7;
    double dd_tol = 1e-9;
    int t_count = 33;
    SolverConfig solver;
};

struct UniquenessRun {
    SolveOutcome outcome;
    double sup_lambda_max = 0.0;
    bool distance_decreasing = false;
};

struct UniquenessPair {
    int a = 0, b = 0;
    double sup_difference = 0.0;
    bool asserted = false;  // both converged and both distance-decreasing
    bool ok = true;
};

struct UniquenessReport {
    std::vector<UniquenessRun> runs;
    std::vector<UniquenessPair> pairs;
    std::vector<nlohmann::json> violations;  // full homotopy diagnostics per failing pair
    double max_asserted_difference = 0.0;
    bool passed = true;
};

/// Solve from the harmonic extension and init_count - 1 seeded bump
/// perturbations of it, then compare every pair.
UniquenessReport uniqueness_experiment(const GridMap& boundary, const UniquenessConfig& cfg);

nlohmann::json to_json(const HomotopyProfile& p);
nlohmann::json to_json(const JacobiConvexity& j);
nlohmann::json to_json(const UniquenessReport& r);

/// Columns t, area, d2area, sup_lambda_max.
void write_profile_csv(const HomotopyProfile& p, const std::string& path);

}  // namespace msl
