#include "msl/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "msl/csv.hpp"
#include "msl/numeric.hpp"

namespace msl {
namespace {

void check_shapes(const SpectrumSample& s, const GradientMatrix& C) {
    if (s.n() < 1 || C.rows() != s.n() || C.cols() != s.n()) {
        throw std::invalid_argument("chain evaluation: C must be n x n with n = len(lambda)");
    }
    if ((s.lambda.array() < 0.0).any()) throw std::invalid_argument("chain evaluation: lambda must be >= 0");
}

}  // namespace

bool distance_decreasing_hypothesis(const Eigen::VectorXd& lambda) {
    return (lambda.array() <= 1.0).all();
}

bool two_jacobian_hypothesis(const Eigen::VectorXd& lambda, int p) {
    if (p < 2) return false;
    int nonzero = 0;
    const double bound = 1.0 / (p - 1);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] != 0.0) ++nonzero;
        for (Eigen::Index j = 0; j < lambda.size(); ++j) {
            if (i != j && lambda[i] * lambda[j] > bound) return false;
        }
    }
    return nonzero <= p;
}

ChainEvaluation eval_chain_A(const SpectrumSample& s, const GradientMatrix& C, const Eigen::VectorXd& row_slack) {
    check_shapes(s, C);
    const Eigen::Index n = s.lambda.size();
    if (row_slack.size() != 0 && row_slack.size() != n) throw std::invalid_argument("row_slack must have length n");
    const Eigen::ArrayXd lam = s.lambda.array();
    const Eigen::ArrayXd mu = 1.0 + lam.square();

    ChainEvaluation e;
    e.has_a = true;
    e.scale = C.squaredNorm() + 1.0;
    e.dd_hypothesis = distance_decreasing_hypothesis(s.lambda);

    double first = 0.0, cross = 0.0, e2_sub = 0.0, e2_first = 0.0, e3 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double row = C.row(i).squaredNorm();
        if (row_slack.size()) row += row_slack[i];
        first += row / mu[i];
        for (Eigen::Index j = 0; j < n; ++j) {
            const double t = lam[j] * C(i, j) + lam[i] * C(j, i);
            cross += t * t / (mu[i] * mu[j]);
            e2_first += C(i, j) * C(i, j) / mu[i];
            e2_sub += (lam[j] * lam[j] * C(i, j) * C(i, j) + lam[i] * lam[i] * C(j, i) * C(j, i)) / (mu[i] * mu[j]);
            e3 += (C(i, j) * C(i, j) / mu[i]) * ((1.0 - lam[j] * lam[j]) / mu[j]);
        }
    }
    e.E1 = first - 0.5 * cross;
    e.E2 = e2_first - e2_sub;
    e.E3 = e3;
    return e;
}

ChainEvaluation eval_chain_C(const SpectrumSample& s, const GradientMatrix& C, int p) {
    check_shapes(s, C);
    if (p < 2) throw std::invalid_argument("eval_chain_C: p must be >= 2");
    const Eigen::Index n = s.lambda.size();
    const Eigen::ArrayXd lam = s.lambda.array();
    const Eigen::ArrayXd mu = 1.0 + lam.square();

    ChainEvaluation e;
    e.has_c = true;
    e.scale = C.squaredNorm() + 1.0;
    e.tj_hypothesis = two_jacobian_hypothesis(s.lambda, p);

    double sq = 0.0, trace_term = 0.0, cross = 0.0;
    double diag = 0.0, offdiag = 0.0, lower = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        trace_term += lam[i] * C(i, i) / mu[i];
        diag += C(i, i) * C(i, i) / (mu[i] * mu[i]);
        for (Eigen::Index j = 0; j < n; ++j) {
            sq += C(i, j) * C(i, j) / mu[i];
            const double t = lam[j] * C(i, j) + lam[i] * C(j, i);
            cross += t * t / (mu[i] * mu[j]);
            if (i == j) continue;
            diag += lam[i] * lam[j] * C(i, i) * C(j, j) / (mu[i] * mu[j]);
            offdiag += (C(i, j) * C(i, j) - 2.0 * lam[i] * lam[j] * C(i, j) * C(j, i) + C(j, i) * C(j, i)) /
                       (2.0 * mu[i] * mu[j]);
            if (i < j && lam[i] != 0.0 && lam[j] != 0.0) {
                const double d = std::abs(C(i, i)) / mu[i] - std::abs(C(j, j)) / mu[j];
                lower += d * d;
            }
        }
    }
    e.F0 = sq + trace_term * trace_term - 0.5 * cross;
    e.F_diag = diag;
    e.F_offdiag = offdiag;
    e.F_lower = lower / static_cast<double>(p - 1);
    return e;
}

namespace {

struct MarginEval {
    double objective;
    const char* which;
};

MarginEval margins_a(const ChainEvaluation& e, bool include_e3) {
    MarginEval m{(e.E1 - e.E2) / e.scale, "E1>=E2"};
    if (include_e3 && e.E3 / e.scale < m.objective) m = {e.E3 / e.scale, "E3>=0"};
    return m;
}

MarginEval margins_c(const ChainEvaluation& e) {
    MarginEval m{(e.F0 - e.F_diag - e.F_offdiag) / e.scale, "F0>=F_diag+F_offdiag"};
    auto consider = [&](double v, const char* w) {
        if (v / e.scale < m.objective) m = {v / e.scale, w};
    };
    consider(e.F_diag - e.F_lower, "F_diag>=F_lower");
    consider(e.F_lower, "F_lower>=0");
    consider(e.F_offdiag, "F_offdiag>=0");
    consider(e.F0, "F0>=0");
    return m;
}

void accumulate_a(ChainMargins& w, const ChainEvaluation& e) {
    w.e1_minus_e2 = std::min(w.e1_minus_e2, (e.E1 - e.E2) / e.scale);
    w.e2_e3_defect = std::max(w.e2_e3_defect, std::abs(e.E2 - e.E3) / e.scale);
    w.e3 = std::min(w.e3, e.E3 / e.scale);
}

void accumulate_c(ChainMargins& w, const ChainEvaluation& e) {
    w.f0_minus_split = std::min(w.f0_minus_split, (e.F0 - e.F_diag - e.F_offdiag) / e.scale);
    w.fdiag_minus_flower = std::min(w.fdiag_minus_flower, (e.F_diag - e.F_lower) / e.scale);
    w.flower = std::min(w.flower, e.F_lower / e.scale);
    w.foffdiag = std::min(w.foffdiag, e.F_offdiag / e.scale);
    w.f0 = std::min(w.f0, e.F0 / e.scale);
}

GradientMatrix sample_c(int n, Rng& rng, bool diagonal_only) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GradientMatrix C = GradientMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!diagonal_only || i == j) C(i, j) = u(rng);
        }
    }
    return C;
}

/// Zero all but at most p entries, then scale so pairwise products respect
/// 1/(p-1); half the time the bound is made tight.
void project_two_jacobian(Eigen::VectorXd& lam, int p, Rng& rng) {
    const auto n = lam.size();
    if (n > p) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index k = p; k < n; ++k) lam[order[static_cast<std::size_t>(k)]] = 0.0;
    }
    double prod = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) prod = std::max(prod, lam[i] * lam[j]);
        }
    }
    const double bound = 1.0 / (p - 1);
    std::bernoulli_distribution tight(0.5);
    if (prod > bound || (prod > 0.0 && tight(rng))) {
        lam *= std::sqrt(bound / prod);
        // Guard against the product rounding just above the bound.
        while (!two_jacobian_hypothesis(lam, p)) lam *= 1.0 - 1e-15;
    }
}

bool margins_ok(const ChainMargins& w, double thr) {
    return w.e1_minus_e2 >= -thr && w.e2_e3_defect <= thr && w.e3 >= -thr && w.f0_minus_split >= -thr &&
           w.fdiag_minus_flower >= -thr && w.flower >= -thr && w.foffdiag >= -thr && w.f0 >= -thr;
}

}  // namespace

CampaignSummary run_chain_a_campaign(const CampaignConfig& cfg) {
    CampaignSummary out;
    out.chain = "A";
    out.samples = cfg.samples;
    out.seed = cfg.seed;
    const bool in_hypothesis = cfg.lambda_hi <= 1.0;
    for (std::int64_t k = 0; k < cfg.samples; ++k) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        const int n = cfg.n_values[static_cast<std::size_t>(k) % cfg.n_values.size()];
        std::uniform_real_distribution<double> ul(0.0, cfg.lambda_hi);
        SpectrumSample s{Eigen::VectorXd(n), 2};
        for (int i = 0; i < n; ++i) s.lambda[i] = ul(rng);
        const GradientMatrix C = sample_c(n, rng, false);
        Eigen::VectorXd slack;
        if (cfg.row_slack) {
            std::uniform_real_distribution<double> us(0.0, 1.0);
            slack.resize(n);
            for (int i = 0; i < n; ++i) slack[i] = us(rng);
        }
        const ChainEvaluation e = eval_chain_A(s, C, slack);
        ChainMargins before = out.worst;
        accumulate_a(out.worst, e);
        if (!in_hypothesis) out.worst.e3 = before.e3;  // E3 >= 0 is only claimed for lambda <= 1
        const bool bad = (e.E1 - e.E2) / e.scale < -cfg.threshold || std::abs(e.E2 - e.E3) / e.scale > cfg.threshold ||
                         (in_hypothesis && e.E3 / e.scale < -cfg.threshold);
        if (bad) ++out.violations;
    }
    out.passed = out.violations == 0 && margins_ok(out.worst, cfg.threshold);
    return out;
}

CampaignSummary run_chain_c_campaign(const CampaignConfig& cfg) {
    CampaignSummary out;
    out.chain = "C";
    out.samples = cfg.samples;
    out.seed = cfg.seed;
    std::vector<std::pair<int, int>> combos;
    for (int n : cfg.n_values) {
        for (int p : cfg.p_values) combos.emplace_back(n, p);
    }
    for (std::int64_t k = 0; k < cfg.samples; ++k) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        const auto [n, p] = combos[static_cast<std::size_t>(k) % combos.size()];
        std::uniform_real_distribution<double> ul(0.0, 2.0);
        SpectrumSample s{Eigen::VectorXd(n), p};
        for (int i = 0; i < n; ++i) s.lambda[i] = ul(rng);
        project_two_jacobian(s.lambda, p, rng);
        const GradientMatrix C = sample_c(n, rng, false);
        const ChainEvaluation e = eval_chain_C(s, C, p);
        accumulate_c(out.worst, e);
        if (margins_c(e).objective < -cfg.threshold) ++out.violations;
    }
    out.passed = out.violations == 0 && margins_ok(out.worst, cfg.threshold);
    return out;
}

SearchResult counterexample_search(const SearchRegime& regime, std::int64_t budget, std::uint64_t seed, double threshold) {
    if (budget < 1) throw std::invalid_argument("counterexample_search: budget must be >= 1");
    if (regime.chain != 'A' && regime.chain != 'C') throw std::invalid_argument("counterexample_search: chain must be A or C");
    if (regime.chain == 'C' && regime.p < 2) throw std::invalid_argument("counterexample_search: p must be >= 2");
    const int n = regime.fixed_lambda ? static_cast<int>(regime.fixed_lambda->size()) : regime.n;

    auto evaluate = [&](const SpectrumSample& s, const GradientMatrix& C) -> std::pair<ChainEvaluation, MarginEval> {
        if (regime.chain == 'A') {
            ChainEvaluation e = eval_chain_A(s, C);
            // E3 >= 0 is part of the chain only inside the hypothesis; outside it
            // the E3 sign is exactly what is being probed.
            return {e, margins_a(e, true)};
        }
        ChainEvaluation e = eval_chain_C(s, C, regime.p);
        return {e, margins_c(e)};
    };

    auto clamp_lambda = [&](Eigen::VectorXd& lam, Rng& rng) {
        if (regime.fixed_lambda) {
            lam = *regime.fixed_lambda;
            return;
        }
        lam = lam.cwiseMax(0.0).cwiseMin(regime.lambda_hi);
        if (regime.chain == 'C') {
            if (regime.enforce_hypothesis) {
                project_two_jacobian(lam, regime.p, rng);
            } else if (lam.size() > regime.p) {
                // keep the rank bound even outside the product hypothesis
                std::vector<Eigen::Index> order(static_cast<std::size_t>(lam.size()));
                for (Eigen::Index i = 0; i < lam.size(); ++i) order[static_cast<std::size_t>(i)] = i;
                std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lam[a] > lam[b]; });
                for (std::size_t k = static_cast<std::size_t>(regime.p); k < order.size(); ++k) lam[order[k]] = 0.0;
            }
        } else if (regime.enforce_hypothesis) {
            lam = lam.cwiseMin(1.0);
        }
    };

    SearchResult best;
    best.objective = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    std::uniform_real_distribution<double> ul(0.0, regime.lambda_hi);

    const std::int64_t random_phase = std::max<std::int64_t>(1, budget / 2);
    for (std::int64_t k = 0; k < random_phase; ++k) {
        SpectrumSample s{Eigen::VectorXd(n), regime.p};
        for (int i = 0; i < n; ++i) s.lambda[i] = ul(rng);
        clamp_lambda(s.lambda, rng);
        const GradientMatrix C = sample_c(n, rng, regime.diagonal_only);
        auto [e, m] = evaluate(s, C);
        ++best.evaluations;
        if (m.objective < best.objective) {
            best.objective = m.objective;
            best.inequality = m.which;
            best.sample = s;
            best.C = C;
            best.evaluation = e;
        }
    }

    // Local refinement: shrinking random perturbations of the incumbent.
    std::normal_distribution<double> gauss(0.0, 1.0);
    double step = 0.25;
    for (std::int64_t k = random_phase; k < budget; ++k) {
        SpectrumSample s = best.sample;
        GradientMatrix C = best.C;
        for (int i = 0; i < n; ++i) s.lambda[i] += step * regime.lambda_hi * gauss(rng);
        clamp_lambda(s.lambda, rng);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (regime.diagonal_only && i != j) continue;
                C(i, j) = std::clamp(C(i, j) + step * gauss(rng), -1.0, 1.0);
            }
        }
        auto [e, m] = evaluate(s, C);
        ++best.evaluations;
        if (m.objective < best.objective) {
            best.objective = m.objective;
            best.inequality = m.which;
            best.sample = s;
            best.C = C;
            best.evaluation = e;
        } else if ((k - random_phase) % 200 == 199) {
            step = std::max(step * 0.5, 1e-4);
        }
    }
    best.found = best.objective < -threshold;
    return best;
}

nlohmann::json to_json(const ChainEvaluation& e) {
    nlohmann::json j = {{"scale", e.scale}};
    if (e.has_a) {
        j["E1"] = e.E1;
        j["E2"] = e.E2;
        j["E3"] = e.E3;
        j["dd_hypothesis"] = e.dd_hypothesis;
    }
    if (e.has_c) {
        j["F0"] = e.F0;
        j["F_diag"] = e.F_diag;
        j["F_offdiag"] = e.F_offdiag;
        j["F_lower"] = e.F_lower;
        j["tj_hypothesis"] = e.tj_hypothesis;
    }
    return j;
}

nlohmann::json to_json(const CampaignSummary& s) {
    nlohmann::json worst = s.chain == "A"
        ? nlohmann::json{{"E1_minus_E2", s.worst.e1_minus_e2}, {"E2_E3_defect", s.worst.e2_e3_defect}, {"E3", s.worst.e3}}
        : nlohmann::json{{"F0_minus_split", s.worst.f0_minus_split},
                         {"F_diag_minus_F_lower", s.worst.fdiag_minus_flower},
                         {"F_lower", s.worst.flower},
                         {"F_offdiag", s.worst.foffdiag},
                         {"F0", s.worst.f0}};
    return {{"chain", s.chain}, {"samples", s.samples}, {"seed", s.seed},
            {"worst_margins", worst}, {"violations", s.violations}, {"passed", s.passed}};
}

nlohmann::json to_json(const SearchResult& r) {
    std::vector<double> lam(r.sample.lambda.data(), r.sample.lambda.data() + r.sample.lambda.size());
    std::vector<double> c;
    for (Eigen::Index i = 0; i < r.C.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.C.cols(); ++j) c.push_back(r.C(i, j));
    }
    return {{"found", r.found}, {"objective", r.objective}, {"inequality", r.inequality},
            {"n", r.sample.n()}, {"p", r.sample.p}, {"lambda", lam}, {"C", c},
            {"evaluation", to_json(r.evaluation)}, {"evaluations", r.evaluations}};
}

void write_witness_csv(const std::vector<SearchResult>& witnesses, const std::string& path) {
    CsvWriter csv(path, {"n", "p", "lambda", "C", "E1", "E2", "E3", "F0", "F_diag", "F_offdiag", "F_lower", "inequality", "objective"});
    auto join = [](const double* data, Eigen::Index count) {
        std::string s;
        for (Eigen::Index i = 0; i < count; ++i) {
            if (i) s += ';';
            s += format_double(data[i]);
        }
        return s;
    };
    for (const auto& w : witnesses) {
        const Eigen::MatrixXd rowmajor = w.C.transpose();  // column-major storage of C^T is C row-major
        csv.field(w.sample.n()).field(w.sample.p)
            .field(join(w.sample.lambda.data(), w.sample.lambda.size()))
            .field(join(rowmajor.data(), rowmajor.size()));
        const auto& e = w.evaluation;
        if (e.has_a) csv.field(e.E1).field(e.E2).field(e.E3); else csv.empty().empty().empty();
        if (e.has_c) csv.field(e.F0).field(e.F_diag).field(e.F_offdiag).field(e.F_lower); else csv.empty().empty().empty().empty();
        csv.field(w.inequality).field(w.objective);
        csv.end_row();
    }
}

}  // namespace msl
