#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "msl/grid.hpp"

namespace msl {

struct AreaReport {
    double total_area = 0.0;
    GridMap residual;              // pointwise, zero on boundary nodes
    double residual_sup_norm = 0.0;
    double residual_l2_norm = 0.0;  // quadrature-weighted over interior nodes
};

/// Trapezoidal quadrature of sqrt(det G) over the box, with G evaluated at
/// each cell corner from the cell's edge differences.
double discrete_area(const GridMap& f);

/// Raw gradient of discrete_area with respect to all nodal values (boundary
/// entries included). Node-major, m components per node.
GridMap area_gradient(const GridMap& f);

/// Flux-form residual sum_i D_i(sqrt(g) g^ij D_j f^alpha) at interior nodes.
/// Equals -(1/w_node) * area_gradient, so its weighted pairing with a
/// compactly supported direction is minus the directional derivative of the area.
AreaReport minimal_system_residual(const GridMap& f);

/// div(grad f / sqrt(1 + |grad f|^2)) with the same stencil; requires m == 1.
AreaReport codim1_residual(const GridMap& f);

/// sum over interior nodes of w_node * <residual, W>.
double weighted_pairing(const GridMap& residual, const GridMap& W);

/// Worst relative error between central differences of discrete_area along
/// random interior-supported directions and -weighted_pairing(residual, W).
double fd_gradient_check(const GridMap& f, int trials, double step, std::uint64_t seed = 1);

nlohmann::json to_json(const AreaReport& report);
/// Rows: node, x_0..x_{n-1}, r_0..r_{m-1} (interior nodes only).
void write_residual_csv(const AreaReport& report, const std::string& path);

}  // namespace msl
