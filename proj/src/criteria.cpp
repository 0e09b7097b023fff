#include "msl/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msl/area.hpp"

namespace msl {

const char* to_string(DistanceDecreasing v) {
    switch (v) {
        case DistanceDecreasing::Strict: return "strict";
        case DistanceDecreasing::NonStrict: return "non-strict";
        case DistanceDecreasing::Fails: return "fails";
    }
    return "unknown";
}

DistanceDecreasingResult distance_decreasing_verdict(const SingularSpectrumField& S, const DomainGrid& grid, double tol) {
    if (!(tol >= 0.0)) throw InvalidInput("distance_decreasing_verdict: tol must be >= 0");
    DistanceDecreasingResult r;
    for (std::size_t node = 0; node < S.lambda_max.size(); ++node) {
        r.closure_sup_lambda_max = std::max(r.closure_sup_lambda_max, S.lambda_max[node]);
        if (!grid.is_boundary(node)) r.sup_lambda_max = std::max(r.sup_lambda_max, S.lambda_max[node]);
    }
    r.strict_margin = 1.0 - r.sup_lambda_max;
    if (r.sup_lambda_max < 1.0 - tol) {
        r.verdict = DistanceDecreasing::Strict;
    } else if (r.sup_lambda_max <= 1.0 + tol) {
        r.verdict = DistanceDecreasing::NonStrict;
    } else {
        r.verdict = DistanceDecreasing::Fails;
    }
    return r;
}

int rank_estimate(const SingularSpectrumField& S, double rank_tol) {
    if (!(rank_tol > 0.0)) throw InvalidInput("rank_estimate: rank_tol must be positive");
    int p = 0;
    for (const auto& lam : S.lambda) {
        int count = 0;
        for (Eigen::Index i = 0; i < lam.size(); ++i) count += lam[i] > rank_tol ? 1 : 0;
        p = std::max(p, count);
    }
    return std::min(p, S.rank_cap);
}

TwoJacobianResult two_jacobian_verdict(const SingularSpectrumField& S, const DomainGrid& grid, int p, double tol) {
    if (p < 0) throw InvalidInput("two_jacobian_verdict: p must be >= 0");
    TwoJacobianResult r;
    for (std::size_t node = 0; node < S.two_jacobian.size(); ++node) {
        r.closure_sup_two_jacobian = std::max(r.closure_sup_two_jacobian, S.two_jacobian[node]);
        if (!grid.is_boundary(node)) r.sup_two_jacobian = std::max(r.sup_two_jacobian, S.two_jacobian[node]);
    }
    if (p <= 1) {
        r.vacuous = true;
        r.passes = true;
        r.bound = std::numeric_limits<double>::infinity();
        return r;
    }
    r.bound = 1.0 / static_cast<double>(p - 1);
    r.passes = r.sup_two_jacobian <= r.bound + tol;
    return r;
}

CriteriaVerdict theorem_report(const GridMap& f, const SingularSpectrumField& S,
                               const StabilityReport* stability, const CriteriaConfig& cfg) {
    const auto& grid = f.grid();
    CriteriaVerdict v;
    v.dd = distance_decreasing_verdict(S, grid, cfg.dd_tol);
    v.rank_tol = cfg.rank_tol_factor * v.dd.closure_sup_lambda_max;
    v.rank_p = v.rank_tol > 0.0 ? rank_estimate(S, v.rank_tol) : 0;
    v.tj = two_jacobian_verdict(S, grid, v.rank_p, cfg.tj_tol);
    v.bound_rank = v.rank_p >= 2 ? 1.0 / (v.rank_p - 1) : std::numeric_limits<double>::infinity();
    v.bound_domain = grid.dim() >= 2 ? 1.0 / (grid.dim() - 1) : std::numeric_limits<double>::infinity();

    v.residual_sup = minimal_system_residual(f).residual_sup_norm;
    v.minimal = v.residual_sup <= cfg.minimal_tol;
    if (!v.minimal) {
        v.notes.push_back("hypotheses not met: not minimal");
    }
    if (v.tj.vacuous) {
        v.notes.push_back("numerical rank <= 1: two-jacobian criterion holds vacuously");
    }
    // Flat targets have zero sectional curvature, so only the
    // strict-distance-decreasing-with-boundary case of strict stability applies.
    if (v.minimal) {
        if (v.dd.verdict != DistanceDecreasing::Fails) v.applicable.push_back("distance-decreasing-stability");
        if (v.dd.verdict == DistanceDecreasing::Strict) v.applicable.push_back("strict-distance-decreasing-strict-stability");
        if (v.tj.passes) v.applicable.push_back("two-jacobian-stability");
    }

    if (stability) {
        v.theta_min = stability->min_eigenvalue;
        v.epsilon = stability->epsilon;
        const bool criterion_passes = v.dd.verdict != DistanceDecreasing::Fails || v.tj.passes;
        if (v.minimal && criterion_passes && stability->min_eigenvalue < -stability->epsilon) {
            throw ContradictionDetected("a stability criterion passes but theta_min = " +
                                        std::to_string(stability->min_eigenvalue) + " < -eps = " +
                                        std::to_string(-stability->epsilon));
        }
    }
    return v;
}

nlohmann::json to_json(const CriteriaVerdict& v) {
    auto num = [](double x) -> nlohmann::json {
        if (std::isfinite(x)) return x;
        return nullptr;
    };
    nlohmann::json j = {
        {"sup_lambda_max", v.dd.sup_lambda_max},
        {"closure_sup_lambda_max", v.dd.closure_sup_lambda_max},
        {"strict_margin", v.dd.strict_margin},
        {"dd_verdict", to_string(v.dd.verdict)},
        {"sup_two_jacobian", v.tj.sup_two_jacobian},
        {"closure_sup_two_jacobian", v.tj.closure_sup_two_jacobian},
        {"rank_estimate", v.rank_p},
        {"rank_tol", v.rank_tol},
        {"tj_verdict", v.tj.passes ? "passes" : "fails"},
        {"tj_vacuous", v.tj.vacuous},
        {"bound_one_over_p_minus_1", num(v.bound_rank)},
        {"bound_one_over_n_minus_1", num(v.bound_domain)},
        {"minimal", v.minimal},
        {"residual_sup", v.residual_sup},
        {"applicable_theorems", v.applicable},
        {"notes", v.notes},
    };
    if (v.theta_min) j["theta_min"] = *v.theta_min;
    if (v.epsilon) j["epsilon"] = *v.epsilon;
    return j;
}

}  // namespace msl
