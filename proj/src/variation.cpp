#include "msl/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "msl/area.hpp"
#include "msl/area_density.hpp"
#include "msl/corner_scheme.hpp"
#include "msl/numeric.hpp"

namespace msl {

VariationField::VariationField(GridMap values) : v_(std::move(values)) {
    for (std::size_t node = 0; node < v_.node_count(); ++node) {
        if (!v_.grid().is_boundary(node)) continue;
        for (int a = 0; a < v_.target_dim(); ++a) {
            if (v_(node, a) != 0.0) throw InvalidInput("variation field must vanish on boundary nodes");
        }
    }
}

namespace {

void check_compatible(const GridMap& f, const VariationField& V) {
    if (!(f.grid() == V.map().grid()) || f.target_dim() != V.target_dim()) {
        throw InvalidInput("variation field does not match the map");
    }
}

}  // namespace

double first_variation(const GridMap& f, const VariationField& V) {
    check_compatible(f, V);
    const CornerScheme scheme(f.grid());
    const auto corners = scheme.corners();
    const int m = f.target_dim();
    std::vector<double> terms(corners.size());

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(corners.size()); ++s) {
        const auto& c = corners[static_cast<std::size_t>(s)];
        const SmallMatrix J = scheme.differential(f.values(), m, c);
        const SmallMatrix K = scheme.differential(V.map().values(), m, c);
        const DensityEval d = area_density(J);
        // sum_ij G^ij <D_i V, D_j f> sqrt(det G)
        terms[static_cast<std::size_t>(s)] = d.a * (d.G_inv * (J.transpose() * K)).trace();
    }
    return scheme.weight() * pairwise_sum(terms);
}

SecondVariation second_variation(const GridMap& f, const VariationField& V, double minimal_tol) {
    check_compatible(f, V);
    const CornerScheme scheme(f.grid());
    const auto corners = scheme.corners();
    const int m = f.target_dim();
    std::vector<double> terms(corners.size());

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(corners.size()); ++s) {
        const auto& c = corners[static_cast<std::size_t>(s)];
        const SmallMatrix J = scheme.differential(f.values(), m, c);
        const SmallMatrix K = scheme.differential(V.map().values(), m, c);
        terms[static_cast<std::size_t>(s)] = density_second(area_density(J), J, K);
    }
    SecondVariation out;
    out.value = scheme.weight() * pairwise_sum(terms);
    out.residual_sup = minimal_system_residual(f).residual_sup_norm;
    out.minimal_warning = out.residual_sup > minimal_tol;
    return out;
}

Eigen::VectorXd variation_weights(const GridMap& f) {
    const auto& grid = f.grid();
    const int m = f.target_dim();
    const MetricField metric = induced_metric(f, jacobian(f));
    Eigen::VectorXd w(static_cast<Eigen::Index>(grid.interior_count() * static_cast<std::size_t>(m)));
    for (std::size_t node : grid.interior_nodes()) {
        const double wn = grid.quadrature_weight(node) * std::sqrt(metric.det[node]);
        const auto slot = grid.interior_slot(node);
        for (int a = 0; a < m; ++a) w[slot * m + a] = wn;
    }
    return w;
}

VariationField hessian_apply(const GridMap& f, const VariationField& V) {
    check_compatible(f, V);
    const auto& grid = f.grid();
    const CornerScheme scheme(grid);
    const auto corners = scheme.corners();
    const int m = f.target_dim();
    std::vector<SmallMatrix> local(corners.size());

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(corners.size()); ++s) {
        const auto& c = corners[static_cast<std::size_t>(s)];
        const SmallMatrix J = scheme.differential(f.values(), m, c);
        const SmallMatrix K = scheme.differential(V.map().values(), m, c);
        local[static_cast<std::size_t>(s)] = density_hessian_apply(area_density(J), J, K);
    }

    GridMap raw(f.grid_ptr(), m);
    for (std::size_t s = 0; s < corners.size(); ++s) scheme.scatter(raw.values(), m, corners[s], local[s], scheme.weight());

    const Eigen::VectorXd w = variation_weights(f);
    GridMap out(f.grid_ptr(), m);
    for (std::size_t node : grid.interior_nodes()) {
        const auto slot = grid.interior_slot(node);
        for (int a = 0; a < m; ++a) out(node, a) = raw(node, a) / w[slot * m + a];
    }
    return VariationField(std::move(out));
}

Eigen::SparseMatrix<double> area_hessian(const GridMap& f) {
    const auto& grid = f.grid();
    const CornerScheme scheme(grid);
    const int n = grid.dim();
    const int m = f.target_dim();
    const auto dofs = static_cast<Eigen::Index>(grid.interior_count() * static_cast<std::size_t>(m));

    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& c : scheme.corners()) {
        const SmallMatrix J = scheme.differential(f.values(), m, c);
        const Eigen::MatrixXd H = density_hessian(area_density(J), J);

        // Nodes touched by this corner and their difference coefficients per axis.
        std::vector<std::size_t> nodes;
        std::vector<std::array<double, kMaxDim>> coef;
        auto slot_of = [&](std::size_t node) -> std::size_t {
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                if (nodes[i] == node) return i;
            }
            nodes.push_back(node);
            coef.push_back({});
            return nodes.size() - 1;
        };
        for (int k = 0; k < n; ++k) {
            const double inv_h = 1.0 / grid.spacing(k);
            coef[slot_of(scheme.edge_head(c, k))][static_cast<std::size_t>(k)] += inv_h;
            coef[slot_of(scheme.edge_tail(c, k))][static_cast<std::size_t>(k)] -= inv_h;
        }

        for (std::size_t p = 0; p < nodes.size(); ++p) {
            const auto sp = grid.interior_slot(nodes[p]);
            if (sp < 0) continue;
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const auto sq = grid.interior_slot(nodes[q]);
                if (sq < 0) continue;
                for (int a = 0; a < m; ++a) {
                    for (int b = 0; b < m; ++b) {
                        double v = 0.0;
                        for (int i = 0; i < n; ++i) {
                            const double ci = coef[p][static_cast<std::size_t>(i)];
                            if (ci == 0.0) continue;
                            for (int j = 0; j < n; ++j) {
                                const double cj = coef[q][static_cast<std::size_t>(j)];
                                if (cj == 0.0) continue;
                                v += ci * cj * H(a + m * i, b + m * j);
                            }
                        }
                        if (v != 0.0) trip.emplace_back(sp * m + a, sq * m + b, scheme.weight() * v);
                    }
                }
            }
        }
    }
    Eigen::SparseMatrix<double> K(dofs, dofs);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

const char* to_string(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::Stable: return "stable";
        case StabilityVerdict::Marginal: return "marginal";
        case StabilityVerdict::Unstable: return "unstable";
    }
    return "unknown";
}

StabilityReport stability_index(const GridMap& f, const EigenConfig& cfg) {
    using SpMat = Eigen::SparseMatrix<double>;
    const auto& grid = f.grid();
    const int m = f.target_dim();
    const SpMat K = area_hessian(f);
    const Eigen::VectorXd D = variation_weights(f);
    const Eigen::Index size = K.rows();

    StabilityReport rep{.eigenvector = VariationField::zero(f.grid_ptr(), m)};
    rep.minimal_warning = minimal_system_residual(f).residual_sup_norm > cfg.minimal_tol;
    if (size == 0) {
        rep.converged = true;
        rep.index = "0";
        return rep;
    }

    // Gershgorin bound and diagonal of D^{-1/2} K D^{-1/2}.
    Eigen::VectorXd diag(size);
    Eigen::VectorXd offsum = Eigen::VectorXd::Zero(size);
    for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
        for (SpMat::InnerIterator it(K, col); it; ++it) {
            const double scaled = it.value() / std::sqrt(D[it.row()] * D[it.col()]);
            if (it.row() == it.col()) {
                diag[it.row()] = scaled;
            } else {
                offsum[it.row()] += std::abs(scaled);
            }
        }
    }
    rep.gershgorin_lower = (diag - offsum).minCoeff();
    {
        std::vector<double> d(diag.data(), diag.data() + size);
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
        rep.median_diagonal = d[d.size() / 2];
    }
    rep.epsilon = cfg.verdict_factor * rep.median_diagonal;
    const double scale = std::max(std::abs(rep.median_diagonal), 1.0);

    double shift = rep.gershgorin_lower - 0.01 * std::max(std::abs(rep.gershgorin_lower), scale);
    const SpMat Dm = [&] {
        SpMat M(size, size);
        std::vector<Eigen::Triplet<double>> t;
        for (Eigen::Index i = 0; i < size; ++i) t.emplace_back(i, i, D[i]);
        M.setFromTriplets(t.begin(), t.end());
        return M;
    }();

    Eigen::SimplicialLLT<SpMat> llt;
    llt.analyzePattern(K);
    auto factor = [&](double sigma) {
        const SpMat A = K - sigma * Dm;
        llt.factorize(A);
        return llt.info() == Eigen::Success;
    };
    while (!factor(shift)) shift -= std::max(std::abs(shift), scale);

    // Deterministic start vector.
    Rng rng(0x5eed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = u(rng);
    v /= std::sqrt(v.dot(D.cwiseProduct(v)));

    double best_theta = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_v = v;
    double best_res = std::numeric_limits<double>::infinity();
    double last_theta = std::numeric_limits<double>::infinity();
    int since_refine = 0;

    for (int it = 0; it < cfg.max_iters; ++it) {
        Eigen::VectorXd y = llt.solve(D.cwiseProduct(v));
        y /= std::sqrt(y.dot(D.cwiseProduct(y)));
        v = y;
        const Eigen::VectorXd Kv = K * v;
        const double theta = v.dot(Kv);  // v is D-normalized
        const Eigen::VectorXd r = Kv - theta * D.cwiseProduct(v);
        const double res = std::sqrt(r.dot(r.cwiseQuotient(D)));
        rep.rayleigh_history.push_back(theta);
        rep.iterations = it + 1;
        if (theta < best_theta) {
            best_theta = theta;
            best_res = res;
            best_v = v;
        }
        if (res <= cfg.residual_tol) {
            rep.converged = true;
            best_theta = theta;
            best_res = res;
            best_v = v;
            break;
        }
        // Move the shift toward the current estimate once it settles; a
        // successful Cholesky factorization certifies the shift is still below
        // the smallest eigenvalue.
        ++since_refine;
        const bool settled = std::abs(theta - last_theta) <= 1e-3 * std::abs(theta - shift);
        last_theta = theta;
        if (since_refine >= 5 && settled) {
            since_refine = 0;
            const double gap = theta - shift;
            for (double frac : {0.1, 0.5}) {
                const double candidate = theta - frac * gap;
                if (gap * frac < 1e-9 * scale) break;
                if (factor(candidate)) {
                    shift = candidate;
                    break;
                }
                factor(shift);
            }
        }
    }

    rep.min_eigenvalue = best_theta;
    rep.residual_norm = best_res;
    rep.final_shift = shift;

    GridMap vec(f.grid_ptr(), m);
    for (std::size_t node : grid.interior_nodes()) {
        const auto slot = grid.interior_slot(node);
        for (int a = 0; a < m; ++a) vec(node, a) = best_v[slot * m + a];
    }
    rep.eigenvector = VariationField(std::move(vec));

    if (rep.min_eigenvalue > rep.epsilon) {
        rep.verdict = StabilityVerdict::Stable;
    } else if (rep.min_eigenvalue < -rep.epsilon) {
        rep.verdict = StabilityVerdict::Unstable;
    } else {
        rep.verdict = StabilityVerdict::Marginal;
    }
    rep.index = rep.verdict == StabilityVerdict::Unstable ? ">=1" : "0";
    return rep;
}

nlohmann::json to_json(const StabilityReport& r) {
    return {
        {"min_eigenvalue", r.min_eigenvalue},
        {"verdict", to_string(r.verdict)},
        {"epsilon", r.epsilon},
        {"residual_norm", r.residual_norm},
        {"median_diagonal", r.median_diagonal},
        {"gershgorin_lower", r.gershgorin_lower},
        {"final_shift", r.final_shift},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"minimal_warning", r.minimal_warning},
        {"index", r.index},
        {"rayleigh_history", r.rayleigh_history},
    };
}

}  // namespace msl
