#include "msl/families.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

namespace msl {

void validate_boundary(const BoundarySpec& spec, const DomainGrid& grid) {
    const int n = grid.dim();
    if (spec.m < 1 || spec.m > kMaxDim) throw InvalidInput("boundary.m must be in [1, 4]");
    if (!std::isfinite(spec.s)) throw InvalidInput("boundary.s must be finite");
    if (spec.family == "affine") {
        if (!spec.matrix.empty()) {
            if (static_cast<int>(spec.matrix.size()) != spec.m) throw InvalidInput("boundary.matrix must have m rows");
            for (const auto& row : spec.matrix) {
                if (static_cast<int>(row.size()) != n) throw InvalidInput("boundary.matrix rows must have n entries");
            }
        }
        if (!spec.offset.empty() && static_cast<int>(spec.offset.size()) != spec.m) {
            throw InvalidInput("boundary.offset must have m entries");
        }
    } else if (spec.family == "holomorphic-power") {
        if (n < 2) throw InvalidInput("holomorphic-power needs n >= 2");
        if (spec.m != 2) throw InvalidInput("holomorphic-power needs m = 2");
        if (spec.k < 1) throw InvalidInput("holomorphic-power needs k >= 1");
    } else if (spec.family == "trigonometric") {
        if (!std::isfinite(spec.frequency)) throw InvalidInput("boundary.frequency must be finite");
    } else if (spec.family == "scherk") {
        if (n != 2 || spec.m != 1) throw InvalidInput("scherk needs n = 2, m = 1");
        if (spec.s <= 0.0) throw InvalidInput("scherk needs s > 0");
        for (const auto& e : grid.extents()) {
            if (std::max(std::abs(e.lo), std::abs(e.hi)) * spec.s >= std::numbers::pi / 2) {
                throw InvalidInput("scherk: s * |x| must stay below pi/2 on the box");
            }
        }
    } else if (spec.family == "custom") {
        if (spec.path.empty()) throw InvalidInput("custom boundary needs a path");
    } else {
        throw InvalidInput("unknown boundary family '" + spec.family + "'");
    }
}

GridMap sample_family(const BoundarySpec& spec, const GridPtr& grid, double s) {
    validate_boundary(spec, *grid);
    const int n = grid->dim();
    const int m = spec.m;

    if (spec.family == "affine") {
        return GridMap::sample(grid, m, [&](std::span<const double> x, std::span<double> out) {
            for (int a = 0; a < m; ++a) {
                double v = spec.offset.empty() ? 0.0 : spec.offset[static_cast<std::size_t>(a)];
                for (int i = 0; i < n; ++i) {
                    // Default matrix: identity-like pattern, so the map is nontrivial.
                    const double A = spec.matrix.empty() ? (a == i % m ? 1.0 : 0.0)
                                                         : spec.matrix[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
                    v += A * x[static_cast<std::size_t>(i)];
                }
                out[static_cast<std::size_t>(a)] = s * v;
            }
        });
    }
    if (spec.family == "holomorphic-power") {
        return GridMap::sample(grid, m, [&](std::span<const double> x, std::span<double> out) {
            const std::complex<double> z(x[0], x[1]);
            std::complex<double> w(1.0, 0.0);
            for (int j = 0; j < spec.k; ++j) w *= z;
            w *= s / spec.k;
            out[0] = w.real();
            out[1] = w.imag();
        });
    }
    if (spec.family == "trigonometric") {
        const double w = spec.frequency;
        return GridMap::sample(grid, m, [&](std::span<const double> x, std::span<double> out) {
            for (int a = 0; a < m; ++a) {
                out[static_cast<std::size_t>(a)] =
                    s * std::sin(w * x[0] + a * std::numbers::pi / 2) * std::cos(w * x[static_cast<std::size_t>(n - 1)]);
            }
        });
    }
    if (spec.family == "scherk") {
        return GridMap::sample(grid, 1, [&](std::span<const double> x, std::span<double> out) {
            out[0] = std::log(std::cos(s * x[0]) / std::cos(s * x[1])) / s;
        });
    }
    // custom
    GridMap loaded = load_map(spec.path);
    if (!(loaded.grid() == *grid)) throw InvalidInput("custom boundary grid does not match the configured grid: " + spec.path);
    if (loaded.target_dim() != m) throw InvalidInput("custom boundary has m = " + std::to_string(loaded.target_dim()));
    GridMap out(grid, m, loaded.values());
    for (double& v : out.values()) v *= s;
    return out;
}

BoundaryFamily boundary_family(const BoundarySpec& spec, const GridPtr& grid) {
    validate_boundary(spec, *grid);
    if (spec.family == "custom") {
        auto base = std::make_shared<GridMap>(sample_family(spec, grid, 1.0));
        return [base](double s) { return combine(s, *base, 0.0, *base); };
    }
    return [spec, grid](double s) { return sample_family(spec, grid, s); };
}

bool family_is_exact_minimal(const BoundarySpec& spec) {
    return spec.family == "affine" || spec.family == "holomorphic-power" || spec.family == "scherk";
}

nlohmann::json to_json(const BoundarySpec& spec) {
    nlohmann::json j = {{"family", spec.family}, {"m", spec.m}, {"s", spec.s}};
    if (spec.family == "holomorphic-power") j["k"] = spec.k;
    if (spec.family == "affine") {
        j["matrix"] = spec.matrix;
        j["offset"] = spec.offset;
    }
    if (spec.family == "trigonometric") j["frequency"] = spec.frequency;
    if (spec.family == "custom") j["path"] = spec.path;
    return j;
}

}  // namespace msl
