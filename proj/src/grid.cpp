#include "msl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace msl {

DomainGrid::DomainGrid(std::vector<Interval> extents, std::vector<int> counts)
    : extents_(std::move(extents)), counts_(std::move(counts)) {
    const int n = dim();
    if (n < 1 || n > kMaxDim) {
        throw InvalidInput("domain dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
    if (counts_.size() != extents_.size()) {
        throw InvalidInput("extents and counts must have the same length");
    }
    for (int k = 0; k < n; ++k) {
        const auto& iv = extents_[static_cast<std::size_t>(k)];
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
            throw InvalidInput("axis " + std::to_string(k) + ": extents must be finite");
        }
        if (!(iv.lo < iv.hi)) {
            throw InvalidInput("axis " + std::to_string(k) + ": require a < b");
        }
        if (counts_[static_cast<std::size_t>(k)] < 3) {
            throw InvalidInput("axis " + std::to_string(k) + ": need at least 3 nodes for an interior");
        }
    }

    spacings_.resize(static_cast<std::size_t>(n));
    strides_.assign(static_cast<std::size_t>(n), 1);
    cell_volume_ = 1.0;
    for (int k = 0; k < n; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        spacings_[uk] = (extents_[uk].hi - extents_[uk].lo) / (counts_[uk] - 1);
        cell_volume_ *= spacings_[uk];
    }
    for (int k = n - 2; k >= 0; --k) {
        const auto uk = static_cast<std::size_t>(k);
        strides_[uk] = strides_[uk + 1] * static_cast<std::size_t>(counts_[uk + 1]);
    }
    node_count_ = strides_[0] * static_cast<std::size_t>(counts_[0]);

    boundary_.assign(node_count_, 0);
    interior_slot_.assign(node_count_, -1);
    for (std::size_t node = 0; node < node_count_; ++node) {
        const auto idx = unflatten(node);
        bool bdry = false;
        for (int k = 0; k < n; ++k) {
            if (idx[static_cast<std::size_t>(k)] == 0 || idx[static_cast<std::size_t>(k)] == counts_[static_cast<std::size_t>(k)] - 1) {
                bdry = true;
            }
        }
        boundary_[node] = bdry ? 1 : 0;
        if (!bdry) {
            interior_slot_[node] = static_cast<std::ptrdiff_t>(interior_.size());
            interior_.push_back(node);
        }
    }
}

NodeIndex DomainGrid::unflatten(std::size_t node) const {
    NodeIndex idx{};
    for (int k = 0; k < dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        idx[uk] = static_cast<int>(node / strides_[uk]);
        node %= strides_[uk];
    }
    return idx;
}

std::size_t DomainGrid::flatten(const NodeIndex& idx) const {
    std::size_t node = 0;
    for (int k = 0; k < dim(); ++k) {
        node += static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]) * strides_[static_cast<std::size_t>(k)];
    }
    return node;
}

std::array<double, kMaxDim> DomainGrid::coordinates(std::size_t node) const {
    const auto idx = unflatten(node);
    std::array<double, kMaxDim> x{};
    for (int k = 0; k < dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        // Pin the last node to the upper extent exactly.
        x[uk] = idx[uk] == counts_[uk] - 1 ? extents_[uk].hi : extents_[uk].lo + idx[uk] * spacings_[uk];
    }
    return x;
}

double DomainGrid::quadrature_weight(std::size_t node) const {
    const auto idx = unflatten(node);
    double w = cell_volume_;
    for (int k = 0; k < dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (idx[uk] == 0 || idx[uk] == counts_[uk] - 1) w *= 0.5;
    }
    return w;
}

double DomainGrid::box_volume() const {
    double v = 1.0;
    for (const auto& iv : extents_) v *= iv.hi - iv.lo;
    return v;
}

bool operator==(const DomainGrid& a, const DomainGrid& b) {
    if (a.counts_ != b.counts_) return false;
    for (std::size_t k = 0; k < a.extents_.size(); ++k) {
        if (a.extents_[k].lo != b.extents_[k].lo || a.extents_[k].hi != b.extents_[k].hi) return false;
    }
    return true;
}

GridPtr build_grid(int n, const std::vector<Interval>& extents, const std::vector<int>& counts) {
    if (n < 1) throw InvalidInput("domain dimension must be >= 1");
    if (static_cast<int>(extents.size()) != n || static_cast<int>(counts.size()) != n) {
        throw InvalidInput("expected " + std::to_string(n) + " extents and counts");
    }
    return std::make_shared<const DomainGrid>(extents, counts);
}

GridMap::GridMap(GridPtr grid, int m) : grid_(std::move(grid)), m_(m) {
    if (!grid_) throw InvalidInput("GridMap requires a grid");
    if (m_ < 1 || m_ > kMaxDim) {
        throw InvalidInput("target dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
    values_.assign(grid_->node_count() * static_cast<std::size_t>(m_), 0.0);
}

GridMap::GridMap(GridPtr grid, int m, std::vector<double> values) : GridMap(std::move(grid), m) {
    if (values.size() != values_.size()) {
        throw InvalidInput("expected " + std::to_string(values_.size()) + " values, got " + std::to_string(values.size()));
    }
    values_ = std::move(values);
    if (!all_finite()) throw InvalidInput("map values must be finite");
}

bool GridMap::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridMap::boundary_discrepancy(const GridMap& other) const {
    if (!(grid() == other.grid()) || m_ != other.m_) {
        throw InvalidInput("maps live on different grids or targets");
    }
    double worst = 0.0;
    for (std::size_t node = 0; node < node_count(); ++node) {
        if (!grid_->is_boundary(node)) continue;
        for (int a = 0; a < m_; ++a) worst = std::max(worst, std::abs((*this)(node, a) - other(node, a)));
    }
    return worst;
}

double GridMap::sup_distance(const GridMap& other) const {
    if (values_.size() != other.values_.size()) throw InvalidInput("maps have different sizes");
    double worst = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) worst = std::max(worst, std::abs(values_[i] - other.values_[i]));
    return worst;
}

GridMap combine(double a, const GridMap& f, double b, const GridMap& g) {
    if (!(f.grid() == g.grid()) || f.target_dim() != g.target_dim()) {
        throw InvalidInput("combine: maps live on different grids or targets");
    }
    GridMap out(f.grid_ptr(), f.target_dim());
    auto& v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * f.values()[i] + b * g.values()[i];
    return out;
}

JacobianField jacobian(const GridMap& f) {
    const auto& grid = f.grid();
    const int n = grid.dim();
    const int m = f.target_dim();
    JacobianField out;
    out.n = n;
    out.m = m;
    out.J.assign(grid.node_count(), SmallMatrix::Zero(m, n));
    out.order.assign(grid.node_count(), StencilOrder::CenteredSecondOrder);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(grid.node_count()); ++s) {
        const auto node = static_cast<std::size_t>(s);
        const auto idx = grid.unflatten(node);
        auto& J = out.J[node];
        for (int k = 0; k < n; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const std::size_t st = grid.stride(k);
            const double h = grid.spacing(k);
            const int last = grid.counts()[uk] - 1;
            for (int a = 0; a < m; ++a) {
                double d;
                if (idx[uk] == 0) {
                    d = (-3.0 * f(node, a) + 4.0 * f(node + st, a) - f(node + 2 * st, a)) / (2.0 * h);
                } else if (idx[uk] == last) {
                    d = (3.0 * f(node, a) - 4.0 * f(node - st, a) + f(node - 2 * st, a)) / (2.0 * h);
                } else {
                    d = (f(node + st, a) - f(node - st, a)) / (2.0 * h);
                }
                J(a, k) = d;
            }
            if (idx[uk] == 0 || idx[uk] == last) out.order[node] = StencilOrder::OneSidedSecondOrder;
        }
    }
    return out;
}

SmallVector singular_values(const SmallMatrix& A) {
    Eigen::JacobiSVD<SmallMatrix> svd(A);
    SmallVector s = svd.singularValues();
    // JacobiSVD already sorts; enforce it so ties and signed zeros never leak.
    std::sort(s.data(), s.data() + s.size(), [](double x, double y) { return x > y; });
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = std::max(s[i], 0.0);
    return s;
}

SingularSpectrumField singular_spectrum(const JacobianField& J) {
    SingularSpectrumField out;
    out.rank_cap = std::min(J.n, J.m);
    const std::size_t count = J.J.size();
    out.lambda.resize(count);
    out.lambda_max.resize(count);
    out.two_jacobian.resize(count);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(count); ++s) {
        const auto node = static_cast<std::size_t>(s);
        const SmallVector lam = singular_values(J.J[node]);
        out.lambda[node] = lam;
        out.lambda_max[node] = lam.size() > 0 ? lam[0] : 0.0;
        out.two_jacobian[node] = lam.size() >= 2 ? lam[0] * lam[1] : 0.0;
    }
    return out;
}

MetricField induced_metric(const GridMap& f, const JacobianField& J) {
    const std::size_t count = f.node_count();
    if (J.J.size() != count) throw InvalidInput("jacobian field does not match map");
    MetricField out;
    out.G.resize(count);
    out.det.resize(count);
    out.G_inv.resize(count);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(count); ++s) {
        const auto node = static_cast<std::size_t>(s);
        const auto& Jn = J.J[node];
        SmallMatrix G = SmallMatrix::Identity(Jn.cols(), Jn.cols());
        G.noalias() += Jn.transpose() * Jn;
        Eigen::LLT<SmallMatrix> llt(G);
        out.G[node] = G;
        const double root = llt.matrixLLT().diagonal().prod();
        out.det[node] = root * root;
        out.G_inv[node] = llt.solve(SmallMatrix::Identity(G.rows(), G.cols()));
    }
    return out;
}

nlohmann::json to_json(const GridMap& f) {
    const auto& grid = f.grid();
    nlohmann::json ext = nlohmann::json::array();
    for (const auto& iv : grid.extents()) ext.push_back({iv.lo, iv.hi});
    return {
        {"n", grid.dim()},
        {"m", f.target_dim()},
        {"extents", ext},
        {"counts", grid.counts()},
        {"values", f.values()},
    };
}

GridMap map_from_json(const nlohmann::json& doc) {
    static const char* keys[] = {"n", "m", "extents", "counts", "values"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(std::begin(keys), std::end(keys), key) == std::end(keys)) {
            throw InvalidInput("map document: unknown field '" + key + "'");
        }
    }
    for (const char* key : keys) {
        if (!doc.contains(key)) throw InvalidInput(std::string("map document: missing field '") + key + "'");
    }
    const int n = doc.at("n").get<int>();
    const int m = doc.at("m").get<int>();
    std::vector<Interval> extents;
    for (const auto& e : doc.at("extents")) {
        if (!e.is_array() || e.size() != 2) throw InvalidInput("map document: extents must be [a, b] pairs");
        extents.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    auto counts = doc.at("counts").get<std::vector<int>>();
    auto grid = build_grid(n, extents, counts);
    return GridMap(grid, m, doc.at("values").get<std::vector<double>>());
}

void save_map(const GridMap& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(f).dump() << '\n';
}

GridMap load_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return map_from_json(nlohmann::json::parse(in));
}

}  // namespace msl
