#include "msl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "msl/area.hpp"
#include "msl/hash.hpp"

namespace msl {

void SolverConfig::validate() const {
    if (!(tol_residual_sup > 0.0)) throw InvalidInput("solver: tol_residual_sup must be positive");
    if (max_newton_iters <= 0) throw InvalidInput("solver: max_newton_iters must be positive");
    if (max_fallback_iters <= 0) throw InvalidInput("solver: max_fallback_iters must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw InvalidInput("solver: backtrack_factor must be in (0, 1)");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) throw InvalidInput("solver: sufficient_decrease must be in (0, 1)");
    if (!(jacobian_fd_step > 0.0)) throw InvalidInput("solver: jacobian_fd_step must be positive");
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::NonConvergence: return "non_convergence";
        case SolveStatus::LineSearchStall: return "line_search_stall";
    }
    return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

/// (2n+1)-point negative Laplacian on interior nodes, scalar unknowns.
SpMat interior_laplacian(const DomainGrid& grid) {
    std::vector<Eigen::Triplet<double>> trip;
    const int n = grid.dim();
    trip.reserve(grid.interior_count() * static_cast<std::size_t>(2 * n + 1));
    for (std::size_t node : grid.interior_nodes()) {
        const auto row = grid.interior_slot(node);
        double diag = 0.0;
        for (int k = 0; k < n; ++k) {
            const double c = 1.0 / (grid.spacing(k) * grid.spacing(k));
            diag += 2.0 * c;
            for (std::size_t nb : {node - grid.stride(k), node + grid.stride(k)}) {
                const auto col = grid.interior_slot(nb);
                if (col >= 0) trip.emplace_back(row, col, -c);
            }
        }
        trip.emplace_back(row, row, diag);
    }
    SpMat L(static_cast<Eigen::Index>(grid.interior_count()), static_cast<Eigen::Index>(grid.interior_count()));
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

Eigen::VectorXd gather_interior(const GridMap& f) {
    const auto& grid = f.grid();
    const int m = f.target_dim();
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.interior_count() * static_cast<std::size_t>(m)));
    for (std::size_t node : grid.interior_nodes()) {
        const auto slot = grid.interior_slot(node);
        for (int a = 0; a < m; ++a) v[slot * m + a] = f(node, a);
    }
    return v;
}

GridMap step_map(const GridMap& f, const Eigen::VectorXd& delta, double alpha) {
    GridMap out = f;
    const auto& grid = f.grid();
    const int m = f.target_dim();
    for (std::size_t node : grid.interior_nodes()) {
        const auto slot = grid.interior_slot(node);
        for (int a = 0; a < m; ++a) out(node, a) += alpha * delta[slot * m + a];
    }
    return out;
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

GridMap harmonic_extension(const GridMap& boundary) {
    const auto& grid = boundary.grid();
    const int m = boundary.target_dim();
    GridMap out = boundary;
    if (grid.interior_count() == 0) return out;

    const SpMat L = interior_laplacian(grid);
    Eigen::SimplicialLDLT<SpMat> ldlt(L);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("harmonic_extension: factorization failed");

    const int n = grid.dim();
    for (int a = 0; a < m; ++a) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.interior_count()));
        for (std::size_t node : grid.interior_nodes()) {
            const auto row = grid.interior_slot(node);
            for (int k = 0; k < n; ++k) {
                const double c = 1.0 / (grid.spacing(k) * grid.spacing(k));
                for (std::size_t nb : {node - grid.stride(k), node + grid.stride(k)}) {
                    if (grid.is_boundary(nb)) rhs[row] += c * boundary(nb, a);
                }
            }
        }
        const Eigen::VectorXd u = ldlt.solve(rhs);
        for (std::size_t node : grid.interior_nodes()) out(node, a) = u[grid.interior_slot(node)];
    }
    return out;
}

Eigen::VectorXd interior_residual(const GridMap& f) {
    const AreaReport rep = minimal_system_residual(f);
    return gather_interior(rep.residual);
}

SpMat residual_jacobian(const GridMap& f, double step) {
    const auto& grid = f.grid();
    const int n = grid.dim();
    const int m = f.target_dim();
    const auto dofs = static_cast<Eigen::Index>(grid.interior_count() * static_cast<std::size_t>(m));

    int colors = 1;
    for (int k = 0; k < n; ++k) colors *= 3;
    std::vector<int> color(grid.node_count());
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const auto idx = grid.unflatten(node);
        int c = 0;
        for (int k = n - 1; k >= 0; --k) c = 3 * c + idx[static_cast<std::size_t>(k)] % 3;
        color[node] = c;
    }

    // Offsets of the 3^n box around a node.
    std::vector<std::ptrdiff_t> box;
    for (int t = 0; t < colors; ++t) {
        std::ptrdiff_t off = 0;
        int rest = t;
        for (int k = 0; k < n; ++k) {
            off += static_cast<std::ptrdiff_t>((rest % 3) - 1) * static_cast<std::ptrdiff_t>(grid.stride(k));
            rest /= 3;
        }
        box.push_back(off);
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(dofs) * box.size() * static_cast<std::size_t>(m));
    for (int c = 0; c < colors; ++c) {
        for (int a = 0; a < m; ++a) {
            GridMap plus = f;
            GridMap minus = f;
            bool any = false;
            for (std::size_t node : grid.interior_nodes()) {
                if (color[node] != c) continue;
                plus(node, a) += step;
                minus(node, a) -= step;
                any = true;
            }
            if (!any) continue;
            const Eigen::VectorXd dR = (interior_residual(plus) - interior_residual(minus)) / (2.0 * step);
            for (std::size_t node : grid.interior_nodes()) {
                if (color[node] != c) continue;
                const auto col = grid.interior_slot(node) * m + a;
                const auto idx = grid.unflatten(node);
                for (std::size_t b = 0; b < box.size(); ++b) {
                    // Skip offsets that would wrap across an axis.
                    int rest = static_cast<int>(b);
                    bool inside = true;
                    for (int k = 0; k < n; ++k) {
                        const int j = idx[static_cast<std::size_t>(k)] + (rest % 3) - 1;
                        rest /= 3;
                        if (j < 0 || j >= grid.counts()[static_cast<std::size_t>(k)]) inside = false;
                    }
                    if (!inside) continue;
                    const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + box[b]);
                    const auto row_slot = grid.interior_slot(nb);
                    if (row_slot < 0) continue;
                    for (int r = 0; r < m; ++r) {
                        const auto row = row_slot * m + r;
                        trip.emplace_back(row, col, dR[row]);
                    }
                }
            }
        }
    }
    SpMat Jm(dofs, dofs);
    Jm.setFromTriplets(trip.begin(), trip.end());
    return Jm;
}

SolveOutcome solve_dirichlet(const GridMap& boundary, const GridMap& init, const SolverConfig& cfg) {
    if (init.boundary_discrepancy(boundary) != 0.0) {
        throw InvalidInput("solve_dirichlet: initialization disagrees with boundary data");
    }
    return solve_dirichlet(init, cfg);
}

SolveOutcome solve_dirichlet(const GridMap& init, const SolverConfig& cfg) {
    cfg.validate();
    if (!init.all_finite()) throw InvalidInput("solve_dirichlet: initialization is not finite");

    const auto& grid = init.grid();
    const int m = init.target_dim();
    const double w = grid.cell_volume();

    SolveOutcome out{init};
    out.init_hash = sha256_hex(std::span<const double>(init.values()));

    GridMap f = init;
    double area = discrete_area(f);
    Eigen::VectorXd R = interior_residual(f);
    double rsup = sup_norm(R);
    out.area_history.push_back(area);

    std::optional<Eigen::SimplicialLDLT<SpMat>> fallback_solver;
    const SpMat scalar_lap = interior_laplacian(grid);

    auto finish = [&](SolveStatus status, std::string msg) {
        out.solution = f;
        out.status = status;
        out.converged = status == SolveStatus::Converged;
        out.residual_sup = rsup;
        out.residual_l2 = std::sqrt(w * R.squaredNorm());
        out.message = std::move(msg);
        return out;
    };

    // Area changes below this are indistinguishable from summation round-off.
    auto area_noise = [&] { return 1e-14 * std::max(1.0, std::abs(area)); };

    struct Trial {
        bool accepted = false;
        GridMap map;
        double area;
        Eigen::VectorXd R;
        double rsup;
    };

    auto line_search = [&](const Eigen::VectorXd& delta) -> Trial {
        const double slope = -w * R.dot(delta);  // directional derivative of the area
        double alpha = 1.0;
        for (int k = 0; k < 60; ++k, alpha *= cfg.backtrack_factor) {
            GridMap trial = step_map(f, delta, alpha);
            if (!trial.all_finite()) continue;
            const double a_new = discrete_area(trial);
            const bool armijo = a_new <= area + cfg.sufficient_decrease * alpha * slope;
            // Near convergence the predicted decrease drops below round-off;
            // accept when the residual still improves and the area does not
            // rise beyond summation noise.
            const bool noise_regime = std::abs(alpha * slope) <= area_noise() && a_new <= area + area_noise();
            if (armijo || noise_regime) {
                Eigen::VectorXd R_new = interior_residual(trial);
                const double rs = sup_norm(R_new);
                if (armijo || rs < rsup) return {true, std::move(trial), a_new, std::move(R_new), rs};
            }
        }
        return {false, f, area, R, rsup};
    };

    while (rsup > cfg.tol_residual_sup) {
        bool stepped = false;

        if (out.newton_steps < cfg.max_newton_iters) {
            const SpMat Jr = residual_jacobian(f, cfg.jacobian_fd_step);
            Eigen::SparseLU<SpMat> lu;
            lu.analyzePattern(Jr);
            lu.factorize(Jr);
            if (lu.info() == Eigen::Success) {
                const Eigen::VectorXd delta = lu.solve(-R);
                if (lu.info() == Eigen::Success && delta.allFinite() && R.dot(delta) > 0.0) {
                    Trial t = line_search(delta);
                    if (t.accepted) {
                        f = std::move(t.map);
                        area = t.area;
                        R = std::move(t.R);
                        rsup = t.rsup;
                        ++out.newton_steps;
                        stepped = true;
                    }
                }
            }
        }

        if (!stepped) {
            if (out.newton_steps >= cfg.max_newton_iters && out.fallback_steps >= cfg.max_fallback_iters) {
                return finish(SolveStatus::NonConvergence, "iteration caps exhausted");
            }
            if (out.fallback_steps >= cfg.max_fallback_iters) {
                return finish(SolveStatus::NonConvergence, "fallback iteration cap exhausted");
            }
            // Gradient step in the discrete H^1 metric.
            if (!fallback_solver) {
                fallback_solver.emplace(scalar_lap);
                if (fallback_solver->info() != Eigen::Success) {
                    return finish(SolveStatus::LineSearchStall, "fallback factorization failed");
                }
            }
            Eigen::VectorXd delta(R.size());
            for (int a = 0; a < m; ++a) {
                Eigen::VectorXd comp(static_cast<Eigen::Index>(grid.interior_count()));
                for (Eigen::Index i = 0; i < comp.size(); ++i) comp[i] = R[i * m + a];
                const Eigen::VectorXd sol = fallback_solver->solve(comp);
                for (Eigen::Index i = 0; i < comp.size(); ++i) delta[i * m + a] = sol[i];
            }
            Trial t = line_search(delta);
            if (!t.accepted) {
                return finish(SolveStatus::LineSearchStall, "no step size decreases the area");
            }
            f = std::move(t.map);
            area = t.area;
            R = std::move(t.R);
            rsup = t.rsup;
            ++out.fallback_steps;
        }

        ++out.iterations;
        out.area_history.push_back(area);
        if (out.newton_steps >= cfg.max_newton_iters && out.fallback_steps >= cfg.max_fallback_iters && rsup > cfg.tol_residual_sup) {
            return finish(SolveStatus::NonConvergence, "iteration caps exhausted");
        }
    }
    return finish(SolveStatus::Converged, "residual below tolerance");
}

ContinuationResult continuation_solve(const BoundaryFamily& family, double s_max, int steps, const SolverConfig& cfg) {
    if (steps < 1) throw InvalidInput("continuation_solve: steps must be >= 1");
    ContinuationResult result;
    std::optional<GridMap> previous;
    for (int k = 1; k <= steps; ++k) {
        const double s = s_max * static_cast<double>(k) / static_cast<double>(steps);
        const GridMap boundary = family(s);
        GridMap init = harmonic_extension(boundary);
        if (previous) {
            // Warm start: previous solution plus the harmonic extension of the boundary change.
            GridMap delta = combine(1.0, boundary, -1.0, *previous);
            GridMap lift = harmonic_extension(delta);
            init = combine(1.0, *previous, 1.0, lift);
            for (std::size_t node = 0; node < init.node_count(); ++node) {
                if (!init.grid().is_boundary(node)) continue;
                for (int a = 0; a < init.target_dim(); ++a) init(node, a) = boundary(node, a);
            }
        }
        SolveOutcome outcome = solve_dirichlet(init, cfg);
        if (!outcome.converged && !result.first_failure) result.first_failure = s;
        previous = outcome.solution;
        result.steps.push_back({s, std::move(outcome)});
    }
    return result;
}

nlohmann::json to_json(const SolverConfig& cfg) {
    return {
        {"tol_residual_sup", cfg.tol_residual_sup},
        {"max_newton_iters", cfg.max_newton_iters},
        {"max_fallback_iters", cfg.max_fallback_iters},
        {"backtrack_factor", cfg.backtrack_factor},
        {"sufficient_decrease", cfg.sufficient_decrease},
        {"jacobian_fd_step", cfg.jacobian_fd_step},
    };
}

nlohmann::json to_json(const SolveOutcome& o) {
    return {
        {"status", to_string(o.status)},
        {"converged", o.converged},
        {"iterations", o.iterations},
        {"newton_steps", o.newton_steps},
        {"fallback_steps", o.fallback_steps},
        {"residual_sup", o.residual_sup},
        {"residual_l2", o.residual_l2},
        {"area_history", o.area_history},
        {"init_hash", o.init_hash},
        {"message", o.message},
    };
}

}  // namespace msl
