#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msl/grid.hpp"
#include "msl/variation.hpp"

namespace msl {

/// A passing sufficient criterion together with a negative stability index.
/// This can only come from an implementation error.
class ContradictionDetected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DistanceDecreasing { Strict, NonStrict, Fails };
const char* to_string(DistanceDecreasing v);

struct DistanceDecreasingResult {
    DistanceDecreasing verdict = DistanceDecreasing::Strict;
    double sup_lambda_max = 0.0;          // interior nodes
    double closure_sup_lambda_max = 0.0;  // all nodes
    double strict_margin = 1.0;           // 1 - sup_lambda_max
};

/// Strict if sup lambda_max < 1 - tol, non-strict within tol of 1, fails above.
DistanceDecreasingResult distance_decreasing_verdict(const SingularSpectrumField& S, const DomainGrid& grid, double tol);

/// max over nodes of #{lambda_i > rank_tol}, clamped to min(n, m).
int rank_estimate(const SingularSpectrumField& S, double rank_tol);

struct TwoJacobianResult {
    bool passes = true;
    bool vacuous = false;             // p <= 1
    double sup_two_jacobian = 0.0;    // interior
    double closure_sup_two_jacobian = 0.0;
    double bound = 0.0;               // 1/(p-1), or +inf when vacuous
};

TwoJacobianResult two_jacobian_verdict(const SingularSpectrumField& S, const DomainGrid& grid, int p, double tol);

struct CriteriaConfig {
    double dd_tol = 1e-9;
    double tj_tol = 1e-9;
    double rank_tol_factor = 1e-8;   // rank_tol = factor * sup lambda_max
    double minimal_tol = 1e-8;
};

struct CriteriaVerdict {
    DistanceDecreasingResult dd;
    TwoJacobianResult tj;
    int rank_p = 0;
    double rank_tol = 0.0;
    double bound_rank = 0.0;    // 1/(p-1)
    double bound_domain = 0.0;  // 1/(n-1), the weaker dimension-only bound
    bool minimal = false;
    double residual_sup = 0.0;
    std::vector<std::string> applicable;
    std::vector<std::string> notes;
    std::optional<double> theta_min;
    std::optional<double> epsilon;
};

/// Combine both criteria. When `stability` is present and a criterion passes
/// while theta_min < -eps, throws ContradictionDetected.
CriteriaVerdict theorem_report(const GridMap& f, const SingularSpectrumField& S,
                               const StabilityReport* stability, const CriteriaConfig& cfg = {});

nlohmann::json to_json(const CriteriaVerdict& v);

}  // namespace msl
