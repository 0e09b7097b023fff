#include "msl/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace msl {
namespace {

using json = nlohmann::json;
using LineMap = std::map<std::string, int>;

const std::set<std::string> kCommands{"solve", "analyze", "homotopy", "oracle", "sweep", "validate"};

std::string join_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

[[noreturn]] void fail(const LineMap& lines, const std::string& path, const std::string& msg) {
    std::string where = path.empty() ? "<root>" : path;
    auto it = lines.find(path);
    if (it != lines.end()) where += " (line " + std::to_string(it->second) + ")";
    throw ConfigError("config error at " + where + ": " + msg);
}

json yaml_scalar(const YAML::Node& node) {
    const std::string s = node.Scalar();
    if (node.Tag() == "!") return s;  // quoted
    if (s == "true" || s == "True") return true;
    if (s == "false" || s == "False") return false;
    if (s == "null" || s == "~" || s.empty()) return nullptr;
    {
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && p == s.data() + s.size()) return v;
        unsigned long long u = 0;
        auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), u);
        if (ec2 == std::errc() && q == s.data() + s.size()) return u;
    }
    {
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (end == s.c_str() + s.size()) return d;
    }
    return s;
}

json yaml_to_json(const YAML::Node& node, const std::string& path, LineMap& lines) {
    lines[path] = node.Mark().line + 1;
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return nullptr;
        case YAML::NodeType::Scalar:
            return yaml_scalar(node);
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            std::size_t i = 0;
            for (const auto& child : node) {
                arr.push_back(yaml_to_json(child, path + "[" + std::to_string(i) + "]", lines));
                ++i;
            }
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : node) {
                const std::string key = kv.first.as<std::string>();
                const std::string child = join_path(path, key);
                if (obj.contains(key)) {
                    lines[child] = kv.first.Mark().line + 1;
                    fail(lines, child, "duplicate key");
                }
                obj[key] = yaml_to_json(kv.second, child, lines);
                lines[child] = kv.first.Mark().line + 1;
            }
            return obj;
        }
    }
    return nullptr;
}

/// Strict view of one config object: every key must be consumed.
class Section {
public:
    Section(const json& j, std::string path, const LineMap& lines) : j_(j), path_(std::move(path)), lines_(lines) {
        if (!j_.is_object()) fail(lines_, path_, "expected a mapping");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    std::optional<Section> child(const std::string& key) {
        if (!take(key)) return std::nullopt;
        const json& v = j_.at(key);
        if (v.is_null()) return std::nullopt;
        return Section(v, join_path(path_, key), lines_);
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!take(key)) return;
        const json& v = j_.at(key);
        if (v.is_null()) return;
        convert(v, join_path(path_, key), out);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) fail(lines_, join_path(path_, it.key()), "unknown key");
        }
    }

    [[noreturn]] void error(const std::string& key, const std::string& msg) const {
        fail(lines_, join_path(path_, key), msg);
    }

private:
    bool take(const std::string& key) {
        if (!j_.contains(key)) return false;
        seen_.insert(key);
        return true;
    }

    void convert(const json& v, const std::string& p, int& out) const {
        if (!v.is_number_integer()) fail(lines_, p, "expected an integer");
        const auto x = v.get<long long>();
        if (x < INT32_MIN || x > INT32_MAX) fail(lines_, p, "integer out of range");
        out = static_cast<int>(x);
    }
    void convert(const json& v, const std::string& p, std::int64_t& out) const {
        if (!v.is_number_integer()) fail(lines_, p, "expected an integer");
        out = v.get<std::int64_t>();
    }
    void convert(const json& v, const std::string& p, std::uint64_t& out) const {
        if (v.is_number_unsigned()) {
            out = v.get<std::uint64_t>();
        } else if (v.is_number_integer() && v.get<long long>() >= 0) {
            out = static_cast<std::uint64_t>(v.get<long long>());
        } else {
            fail(lines_, p, "expected a nonnegative integer");
        }
    }
    void convert(const json& v, const std::string& p, double& out) const {
        if (!v.is_number()) fail(lines_, p, "expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) fail(lines_, p, "expected a finite number");
    }
    void convert(const json& v, const std::string& p, bool& out) const {
        if (!v.is_boolean()) fail(lines_, p, "expected true or false");
        out = v.get<bool>();
    }
    void convert(const json& v, const std::string& p, std::string& out) const {
        if (!v.is_string()) fail(lines_, p, "expected a string");
        out = v.get<std::string>();
    }
    template <class T>
    void convert(const json& v, const std::string& p, std::vector<T>& out) const {
        if (!v.is_array()) fail(lines_, p, "expected a list");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            T x{};
            convert(v[i], p + "[" + std::to_string(i) + "]", x);
            out.push_back(std::move(x));
        }
    }

    const json& j_;
    std::string path_;
    const LineMap& lines_;
    std::set<std::string> seen_;
};

void check(bool ok, const Section& s, const std::string& key, const std::string& msg) {
    if (!ok) s.error(key, msg);
}

RunConfig parse_tree(const json& root, const LineMap& lines) {
    RunConfig cfg;
    Section top(root, "", lines);
    top.get("command", cfg.command);
    check(kCommands.count(cfg.command) > 0, top, "command",
          "must be one of solve, analyze, homotopy, oracle, sweep, validate");
    top.get("seed", cfg.seed);
    top.get("output_dir", cfg.output_dir);

    if (auto g = top.child("grid")) {
        g->get("n", cfg.grid.n);
        std::vector<std::vector<double>> ext;
        g->get("extents", ext);
        for (const auto& e : ext) {
            check(e.size() == 2, *g, "extents", "each extent must be [lo, hi]");
            cfg.grid.extents.push_back({e[0], e[1]});
        }
        g->get("counts", cfg.grid.counts);
        g->finish();
    }
    if (auto b = top.child("boundary")) {
        b->get("family", cfg.boundary.family);
        b->get("m", cfg.boundary.m);
        b->get("s", cfg.boundary.s);
        b->get("k", cfg.boundary.k);
        b->get("matrix", cfg.boundary.matrix);
        b->get("offset", cfg.boundary.offset);
        b->get("frequency", cfg.boundary.frequency);
        b->get("path", cfg.boundary.path);
        b->finish();
    }
    if (auto s = top.child("solver")) {
        s->get("tol_residual_sup", cfg.solver.tol_residual_sup);
        s->get("max_newton_iters", cfg.solver.max_newton_iters);
        s->get("max_fallback_iters", cfg.solver.max_fallback_iters);
        s->get("backtrack_factor", cfg.solver.backtrack_factor);
        s->get("sufficient_decrease", cfg.solver.sufficient_decrease);
        s->get("jacobian_fd_step", cfg.solver.jacobian_fd_step);
        s->finish();
    }
    if (auto e = top.child("eigen")) {
        e->get("residual_tol", cfg.eigen.residual_tol);
        e->get("max_iters", cfg.eigen.max_iters);
        e->get("verdict_factor", cfg.eigen.verdict_factor);
        e->get("minimal_tol", cfg.eigen.minimal_tol);
        e->finish();
    }
    if (auto c = top.child("criteria")) {
        c->get("dd_tol", cfg.criteria.dd_tol);
        c->get("tj_tol", cfg.criteria.tj_tol);
        c->get("rank_tol_factor", cfg.criteria.rank_tol_factor);
        c->get("minimal_tol", cfg.criteria.minimal_tol);
        c->finish();
    }
    if (auto a = top.child("analyze")) {
        a->get("refinement_levels", cfg.analyze.refinement_levels);
        check(cfg.analyze.refinement_levels >= 0 && cfg.analyze.refinement_levels <= 5, *a, "refinement_levels",
              "must be in [0, 5]");
        a->get("stability", cfg.analyze.stability);
        a->finish();
    }
    if (auto h = top.child("homotopy")) {
        auto& hc = cfg.homotopy;
        h->get("t_count", hc.t_count);
        check(hc.t_count >= 3, *h, "t_count", "must be >= 3");
        h->get("init_count", hc.init_count);
        check(hc.init_count >= 2, *h, "init_count", "must be >= 2");
        h->get("bump_amplitude", hc.bump_amplitude);
        h->get("endpoint_bump", hc.endpoint_bump);
        h->get("uniq_tol", hc.uniq_tol);
        check(hc.uniq_tol > 0, *h, "uniq_tol", "must be positive");
        h->get("convexity_tol", hc.convexity_tol);
        check(hc.convexity_tol >= 0, *h, "convexity_tol", "must be >= 0");
        h->finish();
    }
    if (auto o = top.child("oracle")) {
        auto& oc = cfg.oracle;
        o->get("samples", oc.samples);
        check(oc.samples >= 1, *o, "samples", "must be >= 1");
        o->get("n_values", oc.n_values);
        check(!oc.n_values.empty(), *o, "n_values", "must not be empty");
        for (int n : oc.n_values) check(n >= 2 && n <= 16, *o, "n_values", "entries must be in [2, 16]");
        o->get("p_values", oc.p_values);
        check(!oc.p_values.empty(), *o, "p_values", "must not be empty");
        for (int p : oc.p_values) check(p >= 2, *o, "p_values", "entries must be >= 2");
        o->get("lambda_hi", oc.lambda_hi);
        check(oc.lambda_hi > 0, *o, "lambda_hi", "must be positive");
        o->get("row_slack", oc.row_slack);
        o->get("threshold", oc.threshold);
        check(oc.threshold >= 0, *o, "threshold", "must be >= 0");
        o->get("search_lambda_hi", oc.search_lambda_hi);
        check(oc.search_lambda_hi > 0, *o, "search_lambda_hi", "must be positive");
        o->get("search_budget", oc.search_budget);
        check(oc.search_budget >= 1, *o, "search_budget", "must be >= 1");
        o->finish();
    }
    if (auto w = top.child("sweep")) {
        w->get("s_max", cfg.sweep.s_max);
        w->get("steps", cfg.sweep.steps);
        check(cfg.sweep.steps >= 1, *w, "steps", "must be >= 1");
        w->get("stability", cfg.sweep.stability);
        w->finish();
    }
    top.finish();

    // Semantic checks that need several sections together.
    if (cfg.grid.extents.empty()) cfg.grid.extents.assign(static_cast<std::size_t>(std::max(cfg.grid.n, 0)), Interval{0.0, 1.0});
    if (cfg.grid.counts.empty()) cfg.grid.counts.assign(static_cast<std::size_t>(std::max(cfg.grid.n, 0)), 33);
    try {
        const GridPtr grid = cfg.build();
        if (cfg.boundary.family != "custom") validate_boundary(cfg.boundary, *grid);
        cfg.solver.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
    return cfg;
}

}  // namespace

GridPtr RunConfig::build() const { return build_grid(grid.n, grid.extents, grid.counts); }

RunConfig parse_config(const std::string& text, const std::string& format) {
    LineMap lines;
    json root;
    if (format == "json") {
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
    } else if (format == "yaml") {
        YAML::Node node;
        try {
            node = YAML::Load(text);
        } catch (const YAML::Exception& e) {
            throw ConfigError("config parse error (line " + std::to_string(e.mark.line + 1) + "): " + e.msg);
        }
        root = yaml_to_json(node, "", lines);
        if (root.is_null()) root = json::object();
    } else {
        throw ConfigError("unknown config format '" + format + "'");
    }
    return parse_tree(root, lines);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::filesystem::path p(path);
    RunConfig cfg = parse_config(ss.str(), p.extension() == ".json" ? "json" : "yaml");
    if (cfg.boundary.family == "custom" && std::filesystem::path(cfg.boundary.path).is_relative()) {
        cfg.boundary.path = (p.parent_path() / cfg.boundary.path).lexically_normal().string();
    }
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json ext = json::array();
    for (const auto& e : cfg.grid.extents) ext.push_back({e.lo, e.hi});
    return {
        {"command", cfg.command},
        {"seed", cfg.seed},
        {"output_dir", cfg.output_dir},
        {"grid", {{"n", cfg.grid.n}, {"extents", ext}, {"counts", cfg.grid.counts}}},
        {"boundary", to_json(cfg.boundary)},
        {"solver", to_json(cfg.solver)},
        {"eigen", {{"residual_tol", cfg.eigen.residual_tol}, {"max_iters", cfg.eigen.max_iters},
                   {"verdict_factor", cfg.eigen.verdict_factor}, {"minimal_tol", cfg.eigen.minimal_tol}}},
        {"criteria", {{"dd_tol", cfg.criteria.dd_tol}, {"tj_tol", cfg.criteria.tj_tol},
                      {"rank_tol_factor", cfg.criteria.rank_tol_factor}, {"minimal_tol", cfg.criteria.minimal_tol}}},
        {"analyze", {{"refinement_levels", cfg.analyze.refinement_levels}, {"stability", cfg.analyze.stability}}},
        {"homotopy", {{"t_count", cfg.homotopy.t_count}, {"init_count", cfg.homotopy.init_count},
                      {"bump_amplitude", cfg.homotopy.bump_amplitude}, {"endpoint_bump", cfg.homotopy.endpoint_bump},
                      {"uniq_tol", cfg.homotopy.uniq_tol}, {"convexity_tol", cfg.homotopy.convexity_tol}}},
        {"oracle", {{"samples", cfg.oracle.samples}, {"n_values", cfg.oracle.n_values},
                    {"p_values", cfg.oracle.p_values}, {"lambda_hi", cfg.oracle.lambda_hi},
                    {"row_slack", cfg.oracle.row_slack}, {"threshold", cfg.oracle.threshold},
                    {"search_lambda_hi", cfg.oracle.search_lambda_hi}, {"search_budget", cfg.oracle.search_budget}}},
        {"sweep", {{"s_max", cfg.sweep.s_max}, {"steps", cfg.sweep.steps}, {"stability", cfg.sweep.stability}}},
    };
}

}  // namespace msl
