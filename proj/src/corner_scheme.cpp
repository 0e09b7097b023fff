#include "msl/corner_scheme.hpp"

namespace msl {

CornerScheme::CornerScheme(const DomainGrid& grid) : grid_(&grid) {
    const int n = grid.dim();
    const unsigned corner_count = 1u << n;
    weight_ = grid.cell_volume() / static_cast<double>(corner_count);

    std::size_t cells = 1;
    for (int c : grid.counts()) cells *= static_cast<std::size_t>(c - 1);
    corners_.reserve(cells * corner_count);

    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const auto idx = grid.unflatten(node);
        bool is_base = true;
        for (int k = 0; k < n; ++k) {
            if (idx[static_cast<std::size_t>(k)] == grid.counts()[static_cast<std::size_t>(k)] - 1) is_base = false;
        }
        if (!is_base) continue;
        for (unsigned mask = 0; mask < corner_count; ++mask) corners_.push_back({node, mask});
    }
}

std::size_t CornerScheme::corner_node(const Corner& c) const {
    std::size_t node = c.base;
    for (int k = 0; k < grid_->dim(); ++k) {
        if (c.mask & (1u << k)) node += grid_->stride(k);
    }
    return node;
}

std::size_t CornerScheme::edge_tail(const Corner& c, int k) const {
    return corner_node({c.base, c.mask & ~(1u << k)});
}

SmallMatrix CornerScheme::differential(std::span<const double> values, int m, const Corner& c) const {
    const int n = grid_->dim();
    const auto um = static_cast<std::size_t>(m);
    SmallMatrix D(m, n);
    for (int k = 0; k < n; ++k) {
        const std::size_t tail = edge_tail(c, k) * um;
        const std::size_t head = tail + grid_->stride(k) * um;
        const double inv_h = 1.0 / grid_->spacing(k);
        for (int a = 0; a < m; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            D(a, k) = (values[head + ua] - values[tail + ua]) * inv_h;
        }
    }
    return D;
}

void CornerScheme::scatter(std::span<double> out, int m, const Corner& c, const SmallMatrix& M, double scale) const {
    const int n = grid_->dim();
    const auto um = static_cast<std::size_t>(m);
    for (int k = 0; k < n; ++k) {
        const std::size_t tail = edge_tail(c, k) * um;
        const std::size_t head = tail + grid_->stride(k) * um;
        const double s = scale / grid_->spacing(k);
        for (int a = 0; a < m; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            out[head + ua] += s * M(a, k);
            out[tail + ua] -= s * M(a, k);
        }
    }
}

}  // namespace msl
