#include "msl/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>

#include "msl/area.hpp"
#include "msl/criteria.hpp"
#include "msl/csv.hpp"
#include "msl/families.hpp"
#include "msl/hash.hpp"
#include "msl/homotopy.hpp"
#include "msl/inequality.hpp"
#include "msl/numeric.hpp"
#include "msl/solver.hpp"
#include "msl/variation.hpp"

namespace msl {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> kPlotFiles{"convergence.csv", "eigen_vs_h.csv", "homotopy_profile.csv", "sweep.csv",
                                          "witnesses.csv"};

class Manifest {
public:
    explicit Manifest(fs::path dir) : dir_(std::move(dir)) {}

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void add(const std::string& name) {
        const std::string p = path(name);
        entries_[name] = {{"file", name}, {"present", true}, {"sha256", sha256_file(p)},
                          {"bytes", static_cast<std::uint64_t>(fs::file_size(p))}};
    }

    void absent(const std::string& name, const std::string& reason) {
        if (!entries_.count(name)) entries_[name] = {{"file", name}, {"present", false}, {"reason", reason}};
    }

    json to_json() const {
        json out = json::array();
        for (const auto& [name, e] : entries_) out.push_back(e);
        return out;
    }

private:
    fs::path dir_;
    std::map<std::string, json> entries_;
};

struct Context {
    Context(const RunConfig& c, fs::path dir) : cfg(c), manifest(std::move(dir)) {}

    const RunConfig& cfg;
    Manifest manifest;
    json sections = json::object();
    json timings = json::object();
    std::vector<std::string> messages;
    bool assertion_failed = false;
    bool operational_failed = false;

    void assertion(const std::string& msg) {
        assertion_failed = true;
        messages.push_back("assertion failed: " + msg);
    }
    void operational(const std::string& msg) {
        operational_failed = true;
        messages.push_back("operational failure: " + msg);
    }

    template <class F>
    auto timed(const std::string& name, F&& f) {
        const auto start = std::chrono::steady_clock::now();
        struct Stop {
            Context& ctx;
            std::string name;
            std::chrono::steady_clock::time_point start;
            ~Stop() {
                const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                ctx.timings[name] = ctx.timings.value(name, 0.0) + s;
            }
        } stop{*this, name, start};
        return f();
    }
};

double interior_sup_lambda(const GridMap& f) {
    const auto S = singular_spectrum(jacobian(f));
    double s = 0.0;
    for (std::size_t node : f.grid().interior_nodes()) s = std::max(s, S.lambda_max[node]);
    return s;
}

GridPtr grid_with_counts(const RunConfig& cfg, const std::vector<int>& counts) {
    return build_grid(cfg.grid.n, cfg.grid.extents, counts);
}

// ---------------------------------------------------------------- solve / analyze

SolveOutcome do_solve(Context& ctx, const GridPtr& grid) {
    const auto& cfg = ctx.cfg;
    const GridMap boundary = sample_family(cfg.boundary, grid);
    SolveOutcome out = ctx.timed("solve", [&] { return solve_dirichlet(harmonic_extension(boundary), cfg.solver); });
    const AreaReport area = minimal_system_residual(out.solution);

    json sec = to_json(out);
    sec["area"] = to_json(area);
    sec["sup_lambda_max"] = interior_sup_lambda(out.solution);
    if (family_is_exact_minimal(cfg.boundary)) sec["reference_sup_error"] = out.solution.sup_distance(boundary);
    ctx.sections["solve"] = sec;

    save_map(out.solution, ctx.manifest.path("solution.json"));
    ctx.manifest.add("solution.json");
    write_residual_csv(area, ctx.manifest.path("residual.csv"));
    ctx.manifest.add("residual.csv");
    if (!out.converged) ctx.operational("solver status " + std::string(to_string(out.status)) + ": " + out.message);
    return out;
}

void analyze_solution(Context& ctx, const GridMap& f) {
    const auto& cfg = ctx.cfg;
    const auto S = singular_spectrum(jacobian(f));
    std::optional<StabilityReport> stab;
    if (cfg.analyze.stability) {
        stab = ctx.timed("stability", [&] { return stability_index(f, cfg.eigen); });
        ctx.sections["stability"] = to_json(*stab);
        if (!stab->converged) ctx.operational("eigensolver did not reach its residual tolerance");
    }
    try {
        const auto v = theorem_report(f, S, stab ? &*stab : nullptr, cfg.criteria);
        ctx.sections["criteria"] = to_json(v);
    } catch (const ContradictionDetected& e) {
        ctx.sections["criteria"] = {{"contradiction", e.what()}};
        ctx.assertion(e.what());
    }
}

void refinement_tables(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const int levels = cfg.analyze.refinement_levels;
    if (levels <= 0) {
        ctx.manifest.absent("convergence.csv", "analyze.refinement_levels = 0");
        ctx.manifest.absent("eigen_vs_h.csv", "analyze.refinement_levels = 0");
        return;
    }
    const bool exact = family_is_exact_minimal(cfg.boundary);
    json conv = json::array(), eig = json::array();
    double prev_res = 0.0;
    for (int l = 0; l <= levels; ++l) {
        std::vector<int> counts = cfg.grid.counts;
        for (int& c : counts) c = (c - 1) * (1 << l) + 1;
        const GridPtr grid = grid_with_counts(cfg, counts);
        const double h = grid->spacing(0);
        if (exact) {
            const double res = minimal_system_residual(sample_family(cfg.boundary, grid)).residual_sup_norm;
            const double order = l > 0 && res > 0 ? std::log2(prev_res / res) : std::numeric_limits<double>::quiet_NaN();
            conv.push_back({{"h", h}, {"N", counts[0]}, {"residual_sup", res}, {"order", order}});
            prev_res = res;
        }
        const SolveOutcome out = ctx.timed("refinement", [&] {
            return solve_dirichlet(harmonic_extension(sample_family(cfg.boundary, grid)), cfg.solver);
        });
        json row = {{"h", h}, {"N", counts[0]}, {"converged", out.converged}, {"theta_min", nullptr}};
        if (out.converged) {
            row["theta_min"] = ctx.timed("refinement", [&] { return stability_index(out.solution, cfg.eigen); }).min_eigenvalue;
        }
        eig.push_back(row);
    }

    auto cell = [](CsvWriter& csv, const json& v) {
        if (v.is_number() && std::isfinite(v.get<double>())) csv.field(v.get<double>()); else csv.empty();
    };
    if (exact) {
        {
            CsvWriter csv(ctx.manifest.path("convergence.csv"), {"h", "N", "residual_sup", "order"});
            for (const auto& r : conv) {
                csv.field(r["h"].get<double>()).field(r["N"].get<int>()).field(r["residual_sup"].get<double>());
                cell(csv, r["order"]);
                csv.end_row();
            }
        }
        ctx.manifest.add("convergence.csv");
    } else {
        ctx.manifest.absent("convergence.csv", "boundary family has no exact interior solution");
    }
    {
        CsvWriter csv(ctx.manifest.path("eigen_vs_h.csv"), {"h", "N", "theta_min", "converged"});
        for (const auto& r : eig) {
            csv.field(r["h"].get<double>()).field(r["N"].get<int>());
            cell(csv, r["theta_min"]);
            csv.field(r["converged"].get<bool>() ? 1 : 0);
            csv.end_row();
        }
    }
    ctx.manifest.add("eigen_vs_h.csv");
    ctx.sections["refinement"] = {{"convergence", conv}, {"eigenvalues", eig}};
}

// ---------------------------------------------------------------- homotopy

void do_homotopy(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const GridPtr grid = cfg.build();
    const GridMap boundary = sample_family(cfg.boundary, grid);

    UniquenessConfig uc;
    uc.init_count = cfg.homotopy.init_count;
    uc.seed = cfg.seed;
    uc.bump_amplitude = cfg.homotopy.bump_amplitude;
    uc.uniq_tol = cfg.homotopy.uniq_tol;
    uc.dd_tol = cfg.criteria.dd_tol;
    uc.t_count = cfg.homotopy.t_count;
    uc.solver = cfg.solver;
    const auto uniq = ctx.timed("uniqueness", [&] { return uniqueness_experiment(boundary, uc); });

    json sec = {{"uniqueness", to_json(uniq)}};
    if (!uniq.passed) ctx.assertion("distinct distance-decreasing solutions with the same boundary data");

    const UniquenessRun* base = nullptr;
    for (const auto& r : uniq.runs) {
        if (r.outcome.converged) {
            base = &r;
            break;
        }
    }
    if (!base) {
        ctx.operational("no initialization converged");
        ctx.sections["homotopy"] = sec;
        return;
    }
    const GridMap& f0 = base->outcome.solution;
    Rng rng(derive_seed(cfg.seed, 0x686f6d6fULL));
    const GridMap f1 = combine(1.0, f0, 1.0, random_interior_bump(grid, f0.target_dim(), rng, cfg.homotopy.endpoint_bump));
    const auto fam = linear_homotopy(f0, f1, cfg.homotopy.t_count);
    const auto profile = ctx.timed("profile", [&] { return area_profile(fam, cfg.homotopy.convexity_tol); });
    const auto jac = jacobi_norm_convexity(fam);
    sec["profile"] = to_json(profile);
    sec["jacobi"] = to_json(jac);
    ctx.sections["homotopy"] = sec;

    if (profile.lambda_propagation_defect > 1e-12) ctx.assertion("operator-norm convexity along the homotopy");
    if (!jac.passes) ctx.assertion("Jacobi-norm convexity along the homotopy");
    if (profile.all_distance_decreasing && !profile.convex) ctx.assertion("area profile not convex along a distance-decreasing path");

    write_profile_csv(profile, ctx.manifest.path("homotopy_profile.csv"));
    ctx.manifest.add("homotopy_profile.csv");
}

// ---------------------------------------------------------------- oracle

void do_oracle(Context& ctx) {
    const auto& oc = ctx.cfg.oracle;
    CampaignConfig cc;
    cc.samples = oc.samples;
    cc.seed = ctx.cfg.seed;
    cc.n_values = oc.n_values;
    cc.p_values = oc.p_values;
    cc.lambda_hi = oc.lambda_hi;
    cc.row_slack = oc.row_slack;
    cc.threshold = oc.threshold;

    const auto a = ctx.timed("oracle", [&] { return run_chain_a_campaign(cc); });
    const auto c = ctx.timed("oracle", [&] { return run_chain_c_campaign(cc); });
    if (!a.passed) ctx.assertion("distance-decreasing chain campaign");
    if (!c.passed) ctx.assertion("two-jacobian chain campaign");

    json searches = json::array();
    std::vector<SearchResult> witnesses;
    std::uint64_t k = 0;
    auto search = [&](const std::string& label, const SearchRegime& regime, bool inside) {
        const auto r = ctx.timed("oracle", [&] {
            return counterexample_search(regime, oc.search_budget, derive_seed(ctx.cfg.seed, 0x5ea4c400ULL + k++), oc.threshold);
        });
        json j = to_json(r);
        j["label"] = label;
        j["inside_hypothesis"] = inside;
        searches.push_back(j);
        if (r.found) {
            if (inside) ctx.assertion("chain violation inside the hypotheses (" + label + ")");
            else witnesses.push_back(r);
        }
    };
    for (int n : oc.n_values) {
        search("A-outside-n" + std::to_string(n), {'A', n, 2, oc.search_lambda_hi, false, std::nullopt, false}, false);
        search("A-inside-n" + std::to_string(n), {'A', n, 2, 1.0, true, std::nullopt, false}, true);
    }
    for (int p : oc.p_values) {
        const int n = std::max(p, 2);
        search("C-inside-p" + std::to_string(p), {'C', n, p, 2.0, true, std::nullopt, false}, true);
    }
    search("C-outside-p3-lambda0.9", {'C', 3, 3, 1.0, false, Eigen::VectorXd::Constant(3, 0.9), true}, false);

    // Analytic witness: lambda = (2, 0) with a lone entry in row 2, column 1.
    GradientMatrix C = GradientMatrix::Zero(2, 2);
    C(1, 0) = 1.0;
    const auto analytic = eval_chain_A({Eigen::Vector2d(2.0, 0.0), 2}, C);

    ctx.sections["oracle"] = {{"chain_a", to_json(a)}, {"chain_c", to_json(c)}, {"searches", searches},
                              {"analytic_witness", to_json(analytic)}, {"witness_count", witnesses.size()}};
    if (witnesses.empty()) {
        ctx.manifest.absent("witnesses.csv", "no violating samples found");
    } else {
        write_witness_csv(witnesses, ctx.manifest.path("witnesses.csv"));
        ctx.manifest.add("witnesses.csv");
    }
}

// ---------------------------------------------------------------- sweep

void do_sweep(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const GridPtr grid = cfg.build();
    const auto result = ctx.timed("sweep", [&] {
        return continuation_solve(boundary_family(cfg.boundary, grid), cfg.sweep.s_max, cfg.sweep.steps, cfg.solver);
    });
    json rows = json::array();
    for (const auto& step : result.steps) {
        const GridMap& f = step.outcome.solution;
        const double lam = interior_sup_lambda(f);
        json row = {{"s", step.s}, {"converged", step.outcome.converged}, {"solve", to_json(step.outcome)},
                    {"sup_lambda_max", lam}, {"theta_min", nullptr}};
        if (step.outcome.converged && cfg.sweep.stability) {
            const auto r = ctx.timed("stability", [&] { return stability_index(f, cfg.eigen); });
            row["theta_min"] = r.min_eigenvalue;
            row["verdict"] = to_string(r.verdict);
            try {
                row["criteria"] = to_json(theorem_report(f, singular_spectrum(jacobian(f)), &r, cfg.criteria));
            } catch (const ContradictionDetected& e) {
                row["criteria"] = {{"contradiction", e.what()}};
                ctx.assertion(e.what());
            }
        }
        rows.push_back(row);
    }
    ctx.sections["sweep"] = {{"steps", rows},
                             {"first_failure", result.first_failure ? json(*result.first_failure) : json(nullptr)}};
    if (result.first_failure) ctx.operational("continuation failed at s = " + format_double(*result.first_failure));
    {
        CsvWriter csv(ctx.manifest.path("sweep.csv"), {"s", "converged", "sup_lambda_max", "theta_min"});
        for (const auto& r : rows) {
            csv.field(r["s"].get<double>()).field(r["converged"].get<bool>() ? 1 : 0).field(r["sup_lambda_max"].get<double>());
            if (r["theta_min"].is_number()) csv.field(r["theta_min"].get<double>()); else csv.empty();
            csv.end_row();
        }
    }
    ctx.manifest.add("sweep.csv");
}

// ---------------------------------------------------------------- validate

struct CheckList {
    json checks = json::array();
    bool passed = true;

    void add(const std::string& name, double value, double threshold, bool ok) {
        checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"passed", ok}});
        passed = passed && ok;
    }
    void upper(const std::string& name, double value, double threshold) {
        add(name, value, threshold, value <= threshold);
    }
    void lower(const std::string& name, double value, double threshold) {
        add(name, value, threshold, value >= threshold);
    }
};

GridMap random_affine(const GridPtr& grid, int m, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = grid->dim();
    std::vector<double> A(static_cast<std::size_t>(m * n)), b(static_cast<std::size_t>(m));
    for (double& v : A) v = u(rng);
    for (double& v : b) v = u(rng);
    return GridMap::sample(grid, m, [&](std::span<const double> x, std::span<double> out) {
        for (int a = 0; a < m; ++a) {
            double v = b[static_cast<std::size_t>(a)];
            for (int i = 0; i < n; ++i) v += A[static_cast<std::size_t>(a * n + i)] * x[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(a)] = v;
        }
    });
}

double weighted_dot(const Eigen::VectorXd& w, const GridMap& a, const GridMap& b) {
    const auto& grid = a.grid();
    const int m = a.target_dim();
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(w.size()));
    for (std::size_t node : grid.interior_nodes()) {
        const auto slot = grid.interior_slot(node);
        for (int al = 0; al < m; ++al) terms.push_back(w[slot * m + al] * a(node, al) * b(node, al));
    }
    return pairwise_sum(terms);
}

}  // namespace

json validate_suite(std::uint64_t seed) {
    CheckList cl;
    const GridPtr g2 = build_grid(2, {{0, 1}, {0, 1}}, {17, 17});
    const GridPtr g3 = build_grid(3, {{0, 1}, {0, 1}, {0, 1}}, {9, 9, 9});

    {
        Rng rng(derive_seed(seed, 1));
        double worst = 0.0;
        for (const auto& [grid, m] : std::vector<std::pair<GridPtr, int>>{{g2, 1}, {g2, 2}, {g2, 3}, {g3, 2}, {g3, 3}}) {
            worst = std::max(worst, minimal_system_residual(random_affine(grid, m, rng)).residual_sup_norm);
        }
        cl.upper("affine_residual_sup", worst, 1e-12);

        const GridMap aff = random_affine(g2, 2, rng);
        const auto out = solve_dirichlet(harmonic_extension(aff), SolverConfig{});
        cl.add("affine_solve_iterations", out.iterations, 0, out.converged && out.iterations == 0);
    }
    {
        Rng rng(derive_seed(seed, 2));
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            const GridMap f = random_smooth_map(g2, 1, rng, 0.8);
            const auto r1 = minimal_system_residual(f);
            const auto r2 = codim1_residual(f);
            double diff = 0.0, mag = 0.0;
            for (std::size_t node : g2->interior_nodes()) {
                diff = std::max(diff, std::abs(r1.residual(node, 0) - r2.residual(node, 0)));
                mag = std::max(mag, std::abs(r2.residual(node, 0)));
            }
            worst = std::max(worst, diff / std::max(mag, 1e-300));
        }
        cl.upper("codim1_equivalence_rel", worst, 1e-10);
    }
    {
        CampaignConfig cc;
        cc.samples = 20000;
        cc.seed = derive_seed(seed, 3);
        cc.lambda_hi = 3.0;
        const auto wide = run_chain_a_campaign(cc);
        cl.upper("e2_e3_identity_defect", wide.worst.e2_e3_defect, 1e-12);
        cl.lower("e1_minus_e2_min", wide.worst.e1_minus_e2, -1e-12);
        cc.lambda_hi = 1.0;
        const auto inside = run_chain_a_campaign(cc);
        cl.lower("e3_min_under_dd", inside.worst.e3, -1e-12);
        const auto c = run_chain_c_campaign(cc);
        cl.add("two_jacobian_chain", c.violations, 0, c.passed);
    }
    {
        Rng rng(derive_seed(seed, 4));
        const GridMap f = random_smooth_map(g2, 2, rng, 0.6);
        cl.upper("gradient_fd_rel", fd_gradient_check(f, 5, 1e-5, derive_seed(seed, 5)), 1e-6);

        const VariationField V(random_interior_bump(g2, 2, rng, 0.3));
        const VariationField W(random_interior_bump(g2, 2, rng, 0.3));
        const double fv = first_variation(f, V);
        const double pair = -weighted_pairing(minimal_system_residual(f).residual, V.map());
        cl.upper("first_variation_adjoint_rel", std::abs(fv - pair) / std::max(std::abs(fv), 1e-300), 1e-10);

        const Eigen::VectorXd w = variation_weights(f);
        const double whv = weighted_dot(w, W.map(), hessian_apply(f, V).map());
        const double vhw = weighted_dot(w, V.map(), hessian_apply(f, W).map());
        cl.upper("hessian_symmetry_rel", std::abs(whv - vhw) / std::max({std::abs(whv), std::abs(vhw), 1e-300}), 1e-10);
    }
    {
        const GridPtr g = build_grid(2, {{0, 1}, {0, 1}}, {33, 33});
        const auto r = stability_index(GridMap(g, 1));
        const double target = 2.0 * std::numbers::pi * std::numbers::pi;
        cl.upper("flat_eigenvalue_rel_error", std::abs(r.min_eigenvalue - target) / target, 0.02);
    }
    {
        const GridPtr g = build_grid(2, {{0, 1}, {0, 1}}, {33, 33});
        BoundarySpec spec;
        spec.s = 0.2;
        const auto out = solve_dirichlet(harmonic_extension(sample_family(spec, g)), SolverConfig{});
        cl.upper("holomorphic_solve_residual", out.residual_sup, SolverConfig{}.tol_residual_sup);
        const auto stab = stability_index(out.solution);
        bool consistent = true;
        try {
            (void)theorem_report(out.solution, singular_spectrum(jacobian(out.solution)), &stab);
        } catch (const ContradictionDetected&) {
            consistent = false;
        }
        cl.add("holomorphic_theta_min", stab.min_eigenvalue, -stab.epsilon, consistent && stab.min_eigenvalue >= -stab.epsilon);

        Rng rng(derive_seed(seed, 6));
        const GridMap f1 = combine(1.0, out.solution, 1.0, random_interior_bump(g, 2, rng, 0.05));
        const auto fam = linear_homotopy(out.solution, f1, 17);
        const auto prof = area_profile(fam);
        const auto jac = jacobi_norm_convexity(fam);
        cl.upper("homotopy_lambda_propagation", prof.lambda_propagation_defect, 1e-12);
        cl.upper("homotopy_jacobi_defect", jac.max_defect, 1e-10);
        cl.lower("homotopy_min_d2area", prof.min_d2area, -1e-9);
    }
    return {{"checks", cl.checks}, {"passed", cl.passed}};
}

json without_timings(const json& report) {
    json copy = report;
    copy.erase("timings");
    return copy;
}

RunReport run(const RunConfig& cfg, const std::string& config_source) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir(cfg.output_dir);
    Context ctx(cfg, dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const bool dir_ok = !ec;

    if (!dir_ok) {
        ctx.operational("cannot create output directory " + dir.string() + ": " + ec.message());
    } else {
        try {
            if (cfg.command == "solve") {
                do_solve(ctx, cfg.build());
            } else if (cfg.command == "analyze") {
                const auto out = do_solve(ctx, cfg.build());
                if (out.converged) analyze_solution(ctx, out.solution);
                refinement_tables(ctx);
            } else if (cfg.command == "homotopy") {
                do_homotopy(ctx);
            } else if (cfg.command == "oracle") {
                do_oracle(ctx);
            } else if (cfg.command == "sweep") {
                do_sweep(ctx);
            } else if (cfg.command == "validate") {
                ctx.sections["validate"] = ctx.timed("validate", [&] { return validate_suite(cfg.seed); });
                if (!ctx.sections["validate"]["passed"].get<bool>()) ctx.assertion("validate suite");
            }
        } catch (const ContradictionDetected& e) {
            ctx.assertion(e.what());
        } catch (const std::exception& e) {
            ctx.operational(e.what());
        }
        for (const auto& name : kPlotFiles) ctx.manifest.absent(name, "section empty for command '" + cfg.command + "'");
    }

    RunReport rep;
    rep.exit_code = ctx.assertion_failed ? kExitAssertion : ctx.operational_failed ? kExitOperational : kExitOk;
    ctx.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ctx.timings["finished_at_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    rep.doc = {{"config", to_json(cfg)},
               {"config_source", config_source},
               {"exit_code", rep.exit_code},
               {"status", rep.exit_code == kExitOk ? "ok" : rep.exit_code == kExitAssertion ? "assertion_failed" : "operational_failure"},
               {"messages", ctx.messages},
               {"sections", ctx.sections},
               {"manifest", ctx.manifest.to_json()},
               {"timings", ctx.timings}};
    if (dir_ok) {
        std::ofstream out(dir / "report.json");
        out << rep.doc.dump(2) << "\n";
        if (!out) {
            rep.exit_code = kExitOperational;
        }
    }
    return rep;
}

RunReport input_failure_report(const std::string& output_dir, const std::string& message,
                               const std::string& config_source) {
    RunReport rep;
    rep.exit_code = kExitOperational;
    rep.doc = {{"config", nullptr},
               {"config_source", config_source},
               {"exit_code", rep.exit_code},
               {"status", "operational_failure"},
               {"messages", json::array({message})},
               {"sections", json::object()},
               {"manifest", json::array()},
               {"timings", {{"total", 0.0}}}};
    const fs::path dir(output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!ec) std::ofstream(dir / "report.json") << rep.doc.dump(2) << "\n";
    return rep;
}

}  // namespace msl
