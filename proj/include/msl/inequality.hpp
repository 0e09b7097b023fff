#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace msl {

/// Singular stretches at one point, plus the rank bound used by the
/// two-jacobian chain.
struct SpectrumSample {
    Eigen::VectorXd lambda;
    int p = 2;

    int n() const { return static_cast<int>(lambda.size()); }
};

/// C_ij = <nabla_{df(a_i)} V, b_j> in principal frames.
using GradientMatrix = Eigen::MatrixXd;

struct ChainEvaluation {
    // Distance-decreasing chain.
    double E1 = 0.0, E2 = 0.0, E3 = 0.0;
    // Two-jacobian chain.
    double F0 = 0.0, F_diag = 0.0, F_offdiag = 0.0, F_lower = 0.0;
    double scale = 1.0;  // sum C_ij^2 + 1
    bool has_a = false;
    bool has_c = false;
    bool dd_hypothesis = false;  // all lambda_i <= 1
    bool tj_hypothesis = false;  // lambda_i lambda_j <= 1/(p-1), at most p nonzero
};

/// E1 uses |nabla V|^2 = sum_j C_ij^2 + slack_i; pass an empty slack for the
/// extremal case.
ChainEvaluation eval_chain_A(const SpectrumSample& s, const GradientMatrix& C,
                             const Eigen::VectorXd& row_slack = {});

ChainEvaluation eval_chain_C(const SpectrumSample& s, const GradientMatrix& C, int p);

bool distance_decreasing_hypothesis(const Eigen::VectorXd& lambda);
bool two_jacobian_hypothesis(const Eigen::VectorXd& lambda, int p);

/// Worst normalized margins over a campaign (value / scale). A "min" margin
/// must stay >= -threshold and a "defect" <= threshold.
struct ChainMargins {
    static constexpr double kNone = std::numeric_limits<double>::infinity();
    double e1_minus_e2 = kNone;
    double e2_e3_defect = 0.0;
    double e3 = kNone;
    double f0_minus_split = kNone;  // F0 - (F_diag + F_offdiag)
    double fdiag_minus_flower = kNone;
    double flower = kNone;
    double foffdiag = kNone;
    double f0 = kNone;
};

struct CampaignConfig {
    std::int64_t samples = 100000;
    std::uint64_t seed = 1;
    std::vector<int> n_values{2, 3, 4};
    std::vector<int> p_values{2, 3, 4};
    double lambda_hi = 1.0;      // distance-decreasing campaign box [0, lambda_hi]^n
    bool row_slack = false;
    double threshold = 1e-12;
};

struct CampaignSummary {
    std::string chain;  // "A" or "C"
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    ChainMargins worst;
    std::int64_t violations = 0;
    bool passed = true;
};

/// Distance-decreasing chain over lambda in [0, lambda_hi]^n.
CampaignSummary run_chain_a_campaign(const CampaignConfig& cfg);
/// Two-jacobian chain with lambda_i lambda_j <= 1/(p-1).
CampaignSummary run_chain_c_campaign(const CampaignConfig& cfg);

struct SearchRegime {
    char chain = 'A';
    int n = 2;
    int p = 2;
    double lambda_hi = 2.0;
    bool enforce_hypothesis = false;
    std::optional<Eigen::VectorXd> fixed_lambda;
    bool diagonal_only = false;
};

struct SearchResult {
    bool found = false;             // objective < -threshold
    double objective = 0.0;         // most negative normalized margin
    std::string inequality;         // which margin attains it
    SpectrumSample sample;
    GradientMatrix C;
    ChainEvaluation evaluation;
    std::int64_t evaluations = 0;
};

/// Random search followed by local refinement for the most negative chain
/// margin in the regime. Absence of a witness is not a proof.
SearchResult counterexample_search(const SearchRegime& regime, std::int64_t budget, std::uint64_t seed,
                                   double threshold = 1e-12);

nlohmann::json to_json(const CampaignSummary& s);
nlohmann::json to_json(const SearchResult& r);
nlohmann::json to_json(const ChainEvaluation& e);

/// Columns: n, p, lambda, C (row-major, ';'-separated), E1, E2, E3, F0, F_diag, F_offdiag, F_lower, inequality, objective.
void write_witness_csv(const std::vector<SearchResult>& witnesses, const std::string& path);

}  // namespace msl
