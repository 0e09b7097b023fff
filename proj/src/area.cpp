#include "msl/area.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "msl/area_density.hpp"
#include "msl/corner_scheme.hpp"
#include "msl/csv.hpp"
#include "msl/numeric.hpp"

namespace msl {
namespace {

template <class FluxFn>
GridMap gradient_with_flux(const GridMap& f, FluxFn&& flux_of) {
    const CornerScheme scheme(f.grid());
    const auto corners = scheme.corners();
    const int m = f.target_dim();
    std::vector<SmallMatrix> flux(corners.size());

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(corners.size()); ++s) {
        const auto& c = corners[static_cast<std::size_t>(s)];
        flux[static_cast<std::size_t>(s)] = flux_of(scheme.differential(f.values(), m, c));
    }

    GridMap grad(f.grid_ptr(), m);
    for (std::size_t s = 0; s < corners.size(); ++s) {
        scheme.scatter(grad.values(), m, corners[s], flux[s], scheme.weight());
    }
    return grad;
}

AreaReport report_from_gradient(const GridMap& f, const GridMap& grad) {
    const auto& grid = f.grid();
    const int m = f.target_dim();
    GridMap residual(f.grid_ptr(), m);
    double sup = 0.0;
    std::vector<double> sq;
    sq.reserve(grid.interior_count());
    const double w = grid.cell_volume();
    for (std::size_t node : grid.interior_nodes()) {
        double s2 = 0.0;
        for (int a = 0; a < m; ++a) {
            const double r = -grad(node, a) / w;
            residual(node, a) = r;
            sup = std::max(sup, std::abs(r));
            s2 += r * r;
        }
        sq.push_back(w * s2);
    }
    AreaReport out{discrete_area(f), std::move(residual), sup, std::sqrt(pairwise_sum(sq))};
    return out;
}

}  // namespace

double discrete_area(const GridMap& f) {
    const CornerScheme scheme(f.grid());
    const auto corners = scheme.corners();
    const int m = f.target_dim();
    std::vector<double> density(corners.size());

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(corners.size()); ++s) {
        const SmallMatrix J = scheme.differential(f.values(), m, corners[static_cast<std::size_t>(s)]);
        density[static_cast<std::size_t>(s)] = area_density(J).a;
    }
    return scheme.weight() * pairwise_sum(density);
}

GridMap area_gradient(const GridMap& f) {
    return gradient_with_flux(f, [](const SmallMatrix& J) { return area_density(J).flux; });
}

AreaReport minimal_system_residual(const GridMap& f) {
    return report_from_gradient(f, area_gradient(f));
}

AreaReport codim1_residual(const GridMap& f) {
    if (f.target_dim() != 1) {
        throw InvalidInput("codim1_residual requires a scalar map (m = 1)");
    }
    return report_from_gradient(f, gradient_with_flux(f, [](const SmallMatrix& J) { return codim1_flux(J); }));
}

double weighted_pairing(const GridMap& residual, const GridMap& W) {
    const auto& grid = residual.grid();
    std::vector<double> terms;
    terms.reserve(grid.interior_count());
    for (std::size_t node : grid.interior_nodes()) {
        double s = 0.0;
        for (int a = 0; a < residual.target_dim(); ++a) s += residual(node, a) * W(node, a);
        terms.push_back(grid.quadrature_weight(node) * s);
    }
    return pairwise_sum(terms);
}

double fd_gradient_check(const GridMap& f, int trials, double step, std::uint64_t seed) {
    if (!(step > 0.0)) throw InvalidInput("fd_gradient_check: step must be positive");
    const AreaReport rep = minimal_system_residual(f);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        const GridMap W = random_interior_bump(f.grid_ptr(), f.target_dim(), rng, 1.0);
        const double analytic = -weighted_pairing(rep.residual, W);
        const double fd = (discrete_area(combine(1.0, f, step, W)) - discrete_area(combine(1.0, f, -step, W))) / (2.0 * step);
        const double w_norm = std::sqrt(weighted_pairing(W, W));
        const double denom = std::max(std::abs(analytic), w_norm);
        worst = std::max(worst, std::abs(fd - analytic) / denom);
    }
    return worst;
}

nlohmann::json to_json(const AreaReport& report) {
    return {
        {"total_area", report.total_area},
        {"residual_sup_norm", report.residual_sup_norm},
        {"residual_l2_norm", report.residual_l2_norm},
    };
}

void write_residual_csv(const AreaReport& report, const std::string& path) {
    const auto& grid = report.residual.grid();
    std::vector<std::string> header{"node"};
    for (int k = 0; k < grid.dim(); ++k) header.push_back("x" + std::to_string(k));
    for (int a = 0; a < report.residual.target_dim(); ++a) header.push_back("r" + std::to_string(a));
    CsvWriter csv(path, header);
    for (std::size_t node : grid.interior_nodes()) {
        csv.field(node);
        const auto x = grid.coordinates(node);
        for (int k = 0; k < grid.dim(); ++k) csv.field(x[static_cast<std::size_t>(k)]);
        for (int a = 0; a < report.residual.target_dim(); ++a) csv.field(report.residual(node, a));
        csv.end_row();
    }
}

}  // namespace msl
