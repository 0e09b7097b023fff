#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msl/grid.hpp"

namespace msl {

/// Cell-corner difference scheme underlying the discrete area.
///
/// Every cell of the grid contributes one quadrature point per corner, each
/// with weight cell_volume / 2^n (the trapezoidal rule on the cell). At a
/// corner, column k of the discrete differential is the difference quotient
/// along the cell edge parallel to axis k that passes through the corner.
/// The scheme is exact on affine maps and reduces to the standard (2n+1)-point
/// Laplacian for the Dirichlet energy.
class CornerScheme {
public:
    struct Corner {
        std::size_t base;  // lowest node of the cell
        unsigned mask;     // bit k set: corner sits on the upper face along axis k
    };

    explicit CornerScheme(const DomainGrid& grid);

    const DomainGrid& grid() const { return *grid_; }
    std::span<const Corner> corners() const { return corners_; }
    double weight() const { return weight_; }

    std::size_t corner_node(const Corner& c) const;
    /// Endpoints of the edge used for column k at corner c.
    std::size_t edge_tail(const Corner& c, int k) const;
    std::size_t edge_head(const Corner& c, int k) const { return edge_tail(c, k) + grid_->stride(k); }

    /// m x n difference matrix at a corner of a node-major field with m components.
    SmallMatrix differential(std::span<const double> values, int m, const Corner& c) const;

    /// Adds scale * (adjoint of differential) applied to M (m x n) into `out`.
    void scatter(std::span<double> out, int m, const Corner& c, const SmallMatrix& M, double scale) const;

private:
    const DomainGrid* grid_;
    std::vector<Corner> corners_;
    double weight_;
};

}  // namespace msl
