#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "msl/grid.hpp"

namespace msl {

/// Vertical variation field; boundary entries are exactly zero.
class VariationField {
public:
    explicit VariationField(GridMap values);
    static VariationField zero(const GridPtr& grid, int m) { return VariationField(GridMap(grid, m)); }

    const GridMap& map() const { return v_; }
    int target_dim() const { return v_.target_dim(); }

private:
    GridMap v_;
};

/// d/dt A(f + tV) at t = 0, as the quadrature of
/// sum_ij G^ij <D_i V, D_j f> sqrt(det G) over cell corners.
double first_variation(const GridMap& f, const VariationField& V);

struct SecondVariation {
    double value = 0.0;
    bool minimal_warning = false;  // f was not minimal to `minimal_tol`
    double residual_sup = 0.0;
};

/// Flat-target second variation along the straight line f + tV. The curvature
/// and nabla_V V terms vanish identically here.
SecondVariation second_variation(const GridMap& f, const VariationField& V, double minimal_tol = 1e-8);

/// Weight of each interior dof in the inner product: trapezoidal weight times
/// sqrt(det G) of the base map (from the centred jacobian). Ordered slot*m + alpha.
Eigen::VectorXd variation_weights(const GridMap& f);

/// H V with <W, H V>_w = 1/2 [Q(V+W) - Q(V) - Q(W)].
VariationField hessian_apply(const GridMap& f, const VariationField& V);

/// Analytic sparse Hessian of the discrete area with respect to interior
/// values (unweighted), ordered slot*m + alpha.
Eigen::SparseMatrix<double> area_hessian(const GridMap& f);

enum class StabilityVerdict { Stable, Marginal, Unstable };
const char* to_string(StabilityVerdict v);

struct EigenConfig {
    double residual_tol = 1e-8;   // ||HV - theta V||_w <= tol * ||V||_w
    int max_iters = 3000;
    double verdict_factor = 1e-8; // eps = factor * median diagonal of H
    double minimal_tol = 1e-8;
};

struct StabilityReport {
    double min_eigenvalue = 0.0;
    VariationField eigenvector;
    std::vector<double> rayleigh_history;
    StabilityVerdict verdict = StabilityVerdict::Marginal;
    double epsilon = 0.0;
    double residual_norm = 0.0;     // ||HV - theta V||_w / ||V||_w
    double median_diagonal = 0.0;
    double gershgorin_lower = 0.0;
    double final_shift = 0.0;
    int iterations = 0;
    bool converged = false;
    bool minimal_warning = false;
    /// "0" when stable or marginal, ">=1" when unstable.
    std::string index;
};

StabilityReport stability_index(const GridMap& f, const EigenConfig& cfg = {});

nlohmann::json to_json(const StabilityReport& r);

}  // namespace msl
