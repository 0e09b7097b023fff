#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "msl/grid.hpp"

namespace msl {

struct SolverConfig {
    double tol_residual_sup = 1e-10;
    int max_newton_iters = 50;
    int max_fallback_iters = 5000;
    double backtrack_factor = 0.5;
    double sufficient_decrease = 1e-4;
    double jacobian_fd_step = 1e-7;

    /// Throws InvalidInput when a tolerance or cap is not positive.
    void validate() const;
};

enum class SolveStatus { Converged, NonConvergence, LineSearchStall };
const char* to_string(SolveStatus s);

struct SolveOutcome {
    GridMap solution;
    SolveStatus status = SolveStatus::NonConvergence;
    bool converged = false;
    int iterations = 0;          // accepted steps of either kind
    int newton_steps = 0;
    int fallback_steps = 0;
    double residual_sup = 0.0;
    double residual_l2 = 0.0;
    std::vector<double> area_history;  // area before the first step and after every accepted step
    std::string init_hash;             // sha256 of the initial nodal values
    std::string message;
};

/// Componentwise discrete harmonic extension of the boundary values of `boundary`.
GridMap harmonic_extension(const GridMap& boundary);

/// Residual at interior nodes, ordered slot * m + alpha.
Eigen::VectorXd interior_residual(const GridMap& f);

/// Derivative of interior_residual with respect to interior values, assembled
/// by central differencing over a 3^n node colouring.
Eigen::SparseMatrix<double> residual_jacobian(const GridMap& f, double step);

/// Damped Newton descent on the discrete area with Dirichlet data taken from
/// `init`'s boundary nodes. Boundary values are never modified.
SolveOutcome solve_dirichlet(const GridMap& init, const SolverConfig& cfg);

/// As above, after checking that `init` agrees with `boundary` on the boundary.
SolveOutcome solve_dirichlet(const GridMap& boundary, const GridMap& init, const SolverConfig& cfg);

struct ContinuationStep {
    double s = 0.0;
    SolveOutcome outcome;
};

struct ContinuationResult {
    std::vector<ContinuationStep> steps;
    std::optional<double> first_failure;
};

/// Boundary data as a function of the amplitude s; only boundary nodes of
/// the returned map are used.
using BoundaryFamily = std::function<GridMap(double s)>;

/// Solves at s_k = s_max * k / steps, k = 1..steps, warm-starting each solve
/// from the previous solution.
ContinuationResult continuation_solve(const BoundaryFamily& family, double s_max, int steps, const SolverConfig& cfg);

nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const SolveOutcome& outcome);

}  // namespace msl
