#include "msl/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msl/area.hpp"
#include "msl/criteria.hpp"
#include "msl/csv.hpp"
#include "msl/numeric.hpp"

namespace msl {

HomotopyFamily linear_homotopy(const GridMap& f0, const GridMap& f1, int t_count) {
    if (t_count < 3) throw InvalidInput("linear_homotopy: t_count must be >= 3");
    if (!(f0.grid() == f1.grid()) || f0.target_dim() != f1.target_dim()) {
        throw InvalidInput("linear_homotopy: endpoints must share grid and target dimension");
    }
    const double gap = f0.boundary_discrepancy(f1);
    if (!(gap <= 1e-12)) {
        throw BoundaryMismatch("linear_homotopy: endpoints differ on the boundary by " + std::to_string(gap));
    }
    const auto& grid = f0.grid();
    const int m = f0.target_dim();

    HomotopyFamily fam{{}, {}, combine(1.0, f1, -1.0, f0)};
    clear_boundary(fam.variation);
    for (int k = 0; k < t_count; ++k) {
        const double t = static_cast<double>(k) / (t_count - 1);
        GridMap ft = f0;
        for (std::size_t node : grid.interior_nodes()) {
            for (int a = 0; a < m; ++a) ft(node, a) += t * fam.variation(node, a);
        }
        fam.t.push_back(t);
        fam.maps.push_back(std::move(ft));
    }
    return fam;
}

namespace {

double interior_sup(const DomainGrid& grid, const std::vector<double>& per_node) {
    double s = 0.0;
    for (std::size_t node : grid.interior_nodes()) s = std::max(s, per_node[node]);
    return s;
}

}  // namespace

HomotopyProfile area_profile(const HomotopyFamily& family, double tol) {
    const std::size_t T = family.maps.size();
    if (T < 3) throw InvalidInput("area_profile: need at least three samples");
    const auto& grid = family.maps.front().grid();
    HomotopyProfile p;
    p.t = family.t;
    p.tol = tol;
    const double dt = family.t[1] - family.t[0];

    const SingularSpectrumField s0 = singular_spectrum(jacobian(family.maps.front()));
    const SingularSpectrumField s1 = singular_spectrum(jacobian(family.maps.back()));
    p.endpoint_lambda_max = std::max(interior_sup(grid, s0.lambda_max), interior_sup(grid, s1.lambda_max));

    p.all_distance_decreasing = true;
    for (std::size_t k = 0; k < T; ++k) {
        p.areas.push_back(discrete_area(family.maps[k]));
        const SingularSpectrumField sk = singular_spectrum(jacobian(family.maps[k]));
        const double sup = interior_sup(grid, sk.lambda_max);
        p.sup_lambda_max.push_back(sup);
        if (sup > 1.0) p.all_distance_decreasing = false;
        const double t = family.t[k];
        for (std::size_t node : grid.interior_nodes()) {
            const double bound = (1.0 - t) * s0.lambda_max[node] + t * s1.lambda_max[node];
            p.lambda_propagation_defect = std::max(p.lambda_propagation_defect, sk.lambda_max[node] - bound);
        }
    }

    double amax = -std::numeric_limits<double>::infinity(), amin = -amax;
    for (double a : p.areas) {
        amax = std::max(amax, a);
        amin = std::min(amin, a);
        p.scale = std::max(p.scale, std::abs(a));
    }
    p.area_variation = (amax - amin) / p.scale;

    p.d2area.assign(T, std::numeric_limits<double>::quiet_NaN());
    p.min_d2area = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < T; ++k) {
        p.d2area[k] = (p.areas[k - 1] - 2.0 * p.areas[k] + p.areas[k + 1]) / (dt * dt);
        p.min_d2area = std::min(p.min_d2area, p.d2area[k] / p.scale);
    }
    p.d_area_start = (-3.0 * p.areas[0] + 4.0 * p.areas[1] - p.areas[2]) / (2.0 * dt);
    p.d_area_end = (3.0 * p.areas[T - 1] - 4.0 * p.areas[T - 2] + p.areas[T - 3]) / (2.0 * dt);
    p.convex = p.min_d2area >= -tol;
    return p;
}

JacobiConvexity jacobi_norm_convexity(const HomotopyFamily& family, double tol) {
    const std::size_t T = family.maps.size();
    if (T < 3) throw InvalidInput("jacobi_norm_convexity: need at least three samples");
    const auto& grid = family.maps.front().grid();
    const int n = grid.dim();
    const double dt = family.t[1] - family.t[0];

    std::vector<JacobianField> J;
    J.reserve(T);
    for (const auto& f : family.maps) J.push_back(jacobian(f));
    const JacobianField JV = jacobian(family.variation);

    JacobiConvexity out;
    out.worst_second_difference = std::numeric_limits<double>::infinity();
    for (std::size_t node : grid.interior_nodes()) {
        for (int i = 0; i < n; ++i) {
            auto sq = [&](std::size_t k) { return J[k].J[node].col(i).squaredNorm(); };
            const double e0 = sq(0), e1 = sq(T - 1);
            const double expected = 2.0 * JV.J[node].col(i).squaredNorm();
            const double endpoint = std::sqrt(std::max(e0, e1));
            for (std::size_t k = 0; k < T; ++k) {
                out.endpoint_excess = std::max(out.endpoint_excess, std::sqrt(sq(k)) - endpoint);
                if (k == 0 || k + 1 == T) continue;
                const double d2 = (sq(k - 1) - 2.0 * sq(k) + sq(k + 1)) / (dt * dt);
                out.worst_second_difference = std::min(out.worst_second_difference, d2);
                out.max_defect = std::max(out.max_defect, std::abs(d2 - expected) / (1.0 + e0 + e1));
            }
        }
    }
    if (!std::isfinite(out.worst_second_difference)) out.worst_second_difference = 0.0;
    out.passes = out.worst_second_difference >= -tol && out.max_defect <= tol && out.endpoint_excess <= tol;
    return out;
}

UniquenessReport uniqueness_experiment(const GridMap& boundary, const UniquenessConfig& cfg) {
    if (cfg.init_count < 2) throw InvalidInput("uniqueness_experiment: init_count must be >= 2");
    cfg.solver.validate();
    const GridMap base = harmonic_extension(boundary);
    const int m = boundary.target_dim();

    UniquenessReport rep;
    for (int r = 0; r < cfg.init_count; ++r) {
        GridMap init = base;
        if (r > 0) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
            init = combine(1.0, base, 1.0, random_interior_bump(boundary.grid_ptr(), m, rng, cfg.bump_amplitude));
        }
        UniquenessRun run{solve_dirichlet(init, cfg.solver)};
        const auto dd = distance_decreasing_verdict(singular_spectrum(jacobian(run.outcome.solution)),
                                                    boundary.grid(), cfg.dd_tol);
        run.sup_lambda_max = dd.sup_lambda_max;
        run.distance_decreasing = dd.verdict != DistanceDecreasing::Fails;
        rep.runs.push_back(std::move(run));
    }

    for (int a = 0; a < cfg.init_count; ++a) {
        for (int b = a + 1; b < cfg.init_count; ++b) {
            const auto& ra = rep.runs[static_cast<std::size_t>(a)];
            const auto& rb = rep.runs[static_cast<std::size_t>(b)];
            UniquenessPair pr{a, b, ra.outcome.solution.sup_distance(rb.outcome.solution)};
            pr.asserted = ra.outcome.converged && rb.outcome.converged && ra.distance_decreasing && rb.distance_decreasing;
            if (pr.asserted) {
                rep.max_asserted_difference = std::max(rep.max_asserted_difference, pr.sup_difference);
                pr.ok = pr.sup_difference <= cfg.uniq_tol;
                if (!pr.ok) {
                    const auto fam = linear_homotopy(ra.outcome.solution, rb.outcome.solution, cfg.t_count);
                    rep.violations.push_back({{"pair", {a, b}},
                                              {"sup_difference", pr.sup_difference},
                                              {"profile", to_json(area_profile(fam))},
                                              {"jacobi", to_json(jacobi_norm_convexity(fam))}});
                    rep.passed = false;
                }
            }
            rep.pairs.push_back(pr);
        }
    }
    return rep;
}

namespace {

nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

nlohmann::json to_json(const HomotopyProfile& p) {
    nlohmann::json d2 = nlohmann::json::array();
    for (double v : p.d2area) d2.push_back(finite_or_null(v));
    return {{"t", p.t},
            {"areas", p.areas},
            {"d2area", d2},
            {"d_area_start", p.d_area_start},
            {"d_area_end", p.d_area_end},
            {"sup_lambda_max", p.sup_lambda_max},
            {"endpoint_lambda_max", p.endpoint_lambda_max},
            {"lambda_propagation_defect", p.lambda_propagation_defect},
            {"all_distance_decreasing", p.all_distance_decreasing},
            {"scale", p.scale},
            {"min_d2area_scaled", p.min_d2area},
            {"area_variation_scaled", p.area_variation},
            {"tol", p.tol},
            {"convex", p.convex}};
}

nlohmann::json to_json(const JacobiConvexity& j) {
    return {{"worst_second_difference", j.worst_second_difference},
            {"max_defect", j.max_defect},
            {"endpoint_excess", j.endpoint_excess},
            {"passes", j.passes}};
}

nlohmann::json to_json(const UniquenessReport& r) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : r.runs) {
        runs.push_back({{"status", to_string(run.outcome.status)},
                        {"converged", run.outcome.converged},
                        {"iterations", run.outcome.iterations},
                        {"residual_sup", run.outcome.residual_sup},
                        {"init_hash", run.outcome.init_hash},
                        {"sup_lambda_max", run.sup_lambda_max},
                        {"distance_decreasing", run.distance_decreasing}});
    }
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs) {
        pairs.push_back({{"a", p.a}, {"b", p.b}, {"sup_difference", p.sup_difference},
                         {"asserted", p.asserted}, {"ok", p.ok}});
    }
    return {{"runs", runs}, {"pairs", pairs}, {"violations", r.violations},
            {"max_asserted_difference", r.max_asserted_difference}, {"passed", r.passed}};
}

void write_profile_csv(const HomotopyProfile& p, const std::string& path) {
    CsvWriter csv(path, {"t", "area", "d2area", "sup_lambda_max"});
    for (std::size_t k = 0; k < p.t.size(); ++k) {
        csv.field(p.t[k]).field(p.areas[k]);
        if (std::isfinite(p.d2area[k])) csv.field(p.d2area[k]); else csv.empty();
        csv.field(p.sup_lambda_max[k]);
        csv.end_row();
    }
}

}  // namespace msl
