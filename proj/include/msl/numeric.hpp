#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "msl/grid.hpp"

namespace msl {

/// Pairwise (tree) summation in a fixed order, so reductions do not depend
/// on how per-item values were produced.
double pairwise_sum(std::span<const double> values);

/// Seed for item `index` of a campaign driven by `seed` (splitmix64 mixing),
/// so each item's stream is independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

using Rng = std::mt19937_64;

/// Smooth field vanishing on the boundary: a random combination of the first
/// `modes` sine modes per axis, scaled so its sup norm equals `amplitude`.
GridMap random_interior_bump(const GridPtr& grid, int m, Rng& rng, double amplitude, int modes = 3);

/// Smooth field with generic boundary values: low-order random polynomial
/// plus trigonometric terms, sup norm `amplitude`.
GridMap random_smooth_map(const GridPtr& grid, int m, Rng& rng, double amplitude);

/// Zero out all boundary entries of a node-major field.
void clear_boundary(GridMap& f);

}  // namespace msl
