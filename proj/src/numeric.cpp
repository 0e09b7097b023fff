#include "msl/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace msl {

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

void clear_boundary(GridMap& f) {
    for (std::size_t node = 0; node < f.node_count(); ++node) {
        if (!f.grid().is_boundary(node)) continue;
        for (int a = 0; a < f.target_dim(); ++a) f(node, a) = 0.0;
    }
}

namespace {

void normalize_sup(GridMap& f, double amplitude) {
    double sup = 0.0;
    for (double v : f.values()) sup = std::max(sup, std::abs(v));
    if (sup > 0.0) {
        for (double& v : f.values()) v *= amplitude / sup;
    }
}

}  // namespace

GridMap random_interior_bump(const GridPtr& grid, int m, Rng& rng, double amplitude, int modes) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const int n = grid->dim();
    std::size_t terms = 1;
    for (int k = 0; k < n; ++k) terms *= static_cast<std::size_t>(modes);
    std::vector<double> c(terms * static_cast<std::size_t>(m));
    for (double& v : c) v = coef(rng);

    GridMap f(grid, m);
    for (std::size_t node = 0; node < grid->node_count(); ++node) {
        if (grid->is_boundary(node)) continue;
        const auto x = grid->coordinates(node);
        for (std::size_t t = 0; t < terms; ++t) {
            double basis = 1.0;
            std::size_t rest = t;
            for (int k = 0; k < n; ++k) {
                const int freq = static_cast<int>(rest % static_cast<std::size_t>(modes)) + 1;
                rest /= static_cast<std::size_t>(modes);
                const auto& iv = grid->extents()[static_cast<std::size_t>(k)];
                const double u = (x[static_cast<std::size_t>(k)] - iv.lo) / (iv.hi - iv.lo);
                basis *= std::sin(std::numbers::pi * freq * u);
            }
            // Higher modes get smaller weights to keep the field smooth.
            const double decay = 1.0 / static_cast<double>(1 + t);
            for (int a = 0; a < m; ++a) f(node, a) += decay * c[t * static_cast<std::size_t>(m) + static_cast<std::size_t>(a)] * basis;
        }
    }
    normalize_sup(f, amplitude);
    return f;
}

GridMap random_smooth_map(const GridPtr& grid, int m, Rng& rng, double amplitude) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const int n = grid->dim();
    const auto un = static_cast<std::size_t>(n);
    struct Component {
        std::vector<double> lin, quad, freq, phase;
        double c0, trig;
    };
    std::vector<Component> comps(static_cast<std::size_t>(m));
    for (auto& c : comps) {
        c.c0 = coef(rng);
        c.trig = coef(rng);
        c.lin.resize(un);
        c.quad.resize(un * un);
        c.freq.resize(un);
        c.phase.resize(un);
        for (auto& v : c.lin) v = coef(rng);
        for (auto& v : c.quad) v = 0.5 * coef(rng);
        for (auto& v : c.freq) v = 1.0 + 2.0 * std::abs(coef(rng));
        for (auto& v : c.phase) v = 3.0 * coef(rng);
    }
    GridMap f(grid, m);
    for (std::size_t node = 0; node < grid->node_count(); ++node) {
        const auto x = grid->coordinates(node);
        for (int a = 0; a < m; ++a) {
            const auto& c = comps[static_cast<std::size_t>(a)];
            double v = c.c0;
            double arg = 0.0;
            for (std::size_t i = 0; i < un; ++i) {
                v += c.lin[i] * x[i];
                for (std::size_t j = 0; j < un; ++j) v += c.quad[i * un + j] * x[i] * x[j];
                arg += c.freq[i] * x[i] + c.phase[i];
            }
            v += c.trig * std::sin(arg);
            f(node, a) = v;
        }
    }
    normalize_sup(f, amplitude);
    return f;
}

}  // namespace msl
