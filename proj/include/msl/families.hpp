#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msl/grid.hpp"
#include "msl/solver.hpp"

namespace msl {

/// Named analytic boundary data. Every family is defined on the whole box, so
/// sampling it also gives a natural initial guess (and, for the exact minimal
/// families, an exact reference solution).
///
///   affine             f = s (A x + b)
///   holomorphic-power  f = s z^k / k, z = x_0 + i x_1, m = 2
///   trigonometric      f_a = s sin(w x_0 + a pi / 2) cos(w x_{n-1})
///   scherk             f = log(cos(s x_0) / cos(s x_1)) / s, m = 1, n = 2
///   custom             f = s * (map loaded from `path`)
struct BoundarySpec {
    std::string family = "holomorphic-power";
    int m = 2;
    double s = 0.2;
    int k = 2;
    std::vector<std::vector<double>> matrix;  // m x n, affine only
    std::vector<double> offset;               // m, affine only
    double frequency = 1.0;
    std::string path;
};

/// Throws InvalidInput on a spec that cannot be sampled on `grid`.
void validate_boundary(const BoundarySpec& spec, const DomainGrid& grid);

/// Sample the family with amplitude `s` on every node.
GridMap sample_family(const BoundarySpec& spec, const GridPtr& grid, double s);
inline GridMap sample_family(const BoundarySpec& spec, const GridPtr& grid) {
    return sample_family(spec, grid, spec.s);
}

/// s -> sampled family, for continuation sweeps.
BoundaryFamily boundary_family(const BoundarySpec& spec, const GridPtr& grid);

/// True when the family is an exact solution of the minimal surface system
/// (affine; holomorphic-power; scherk).
bool family_is_exact_minimal(const BoundarySpec& spec);

nlohmann::json to_json(const BoundarySpec& spec);

}  // namespace msl
