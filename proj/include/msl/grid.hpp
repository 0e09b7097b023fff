#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace msl {

/// Upper bound on domain and target dimension. Per-node matrices are
/// stack-allocated with these maxima.
inline constexpr int kMaxDim = 4;

using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Multi-index into a tensor grid; only the first `n` entries are meaningful.
using NodeIndex = std::array<int, kMaxDim>;

/// Axis-aligned box with a uniform tensor grid. Node numbering is row-major
/// with axis 0 slowest.
class DomainGrid {
public:
    DomainGrid(std::vector<Interval> extents, std::vector<int> counts);

    int dim() const { return static_cast<int>(extents_.size()); }
    const std::vector<Interval>& extents() const { return extents_; }
    const std::vector<int>& counts() const { return counts_; }
    const std::vector<double>& spacings() const { return spacings_; }
    double spacing(int axis) const { return spacings_[static_cast<std::size_t>(axis)]; }

    std::size_t node_count() const { return node_count_; }
    std::size_t interior_count() const { return interior_.size(); }
    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    bool is_boundary(std::size_t node) const { return boundary_[node] != 0; }
    const std::vector<char>& boundary_mask() const { return boundary_; }

    /// Interior nodes in increasing node order.
    const std::vector<std::size_t>& interior_nodes() const { return interior_; }
    /// Position of `node` in interior_nodes(), or -1 for boundary nodes.
    std::ptrdiff_t interior_slot(std::size_t node) const { return interior_slot_[node]; }

    NodeIndex unflatten(std::size_t node) const;
    std::size_t flatten(const NodeIndex& idx) const;
    std::array<double, kMaxDim> coordinates(std::size_t node) const;

    /// Product of spacings: the trapezoidal weight of an interior node.
    double cell_volume() const { return cell_volume_; }
    /// Trapezoidal quadrature weight of a node (halved once per boundary axis).
    double quadrature_weight(std::size_t node) const;
    double box_volume() const;

    friend bool operator==(const DomainGrid& a, const DomainGrid& b);

private:
    std::vector<Interval> extents_;
    std::vector<int> counts_;
    std::vector<double> spacings_;
    std::vector<std::size_t> strides_;
    std::size_t node_count_ = 0;
    double cell_volume_ = 0.0;
    std::vector<char> boundary_;
    std::vector<std::size_t> interior_;
    std::vector<std::ptrdiff_t> interior_slot_;
};

using GridPtr = std::shared_ptr<const DomainGrid>;

GridPtr build_grid(int n, const std::vector<Interval>& extents, const std::vector<int>& counts);

/// Sampled map f: box -> R^m, stored node-major (m consecutive components per node).
class GridMap {
public:
    GridMap(GridPtr grid, int m);
    GridMap(GridPtr grid, int m, std::vector<double> values);

    const DomainGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int target_dim() const { return m_; }
    std::size_t node_count() const { return grid_->node_count(); }

    std::span<double> at(std::size_t node) {
        return {values_.data() + node * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
    }
    std::span<const double> at(std::size_t node) const {
        return {values_.data() + node * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
    }
    double& operator()(std::size_t node, int alpha) { return values_[node * static_cast<std::size_t>(m_) + static_cast<std::size_t>(alpha)]; }
    double operator()(std::size_t node, int alpha) const { return values_[node * static_cast<std::size_t>(m_) + static_cast<std::size_t>(alpha)]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;
    /// Max |a - b| over boundary nodes.
    double boundary_discrepancy(const GridMap& other) const;
    double sup_distance(const GridMap& other) const;

    /// Evaluate `fn(x, out)` at every node.
    template <class Fn>
    static GridMap sample(GridPtr grid, int m, Fn&& fn) {
        GridMap f(grid, m);
        std::vector<double> out(static_cast<std::size_t>(m));
        for (std::size_t node = 0; node < grid->node_count(); ++node) {
            const auto x = grid->coordinates(node);
            fn(std::span<const double>(x.data(), static_cast<std::size_t>(grid->dim())), std::span<double>(out));
            for (int a = 0; a < m; ++a) f(node, a) = out[static_cast<std::size_t>(a)];
        }
        return f;
    }

private:
    GridPtr grid_;
    int m_;
    std::vector<double> values_;
};

/// Linear combination a*f + b*g on a common grid.
GridMap combine(double a, const GridMap& f, double b, const GridMap& g);

enum class StencilOrder { CenteredSecondOrder, OneSidedSecondOrder };

struct JacobianField {
    int n = 0;
    int m = 0;
    std::vector<SmallMatrix> J;          // per node, m x n
    std::vector<StencilOrder> order;     // OneSided where any axis used a one-sided stencil
};

struct SingularSpectrumField {
    int rank_cap = 0;                    // min(n, m)
    std::vector<SmallVector> lambda;     // per node, nonincreasing
    std::vector<double> lambda_max;
    std::vector<double> two_jacobian;
};

struct MetricField {
    std::vector<SmallMatrix> G;
    std::vector<double> det;
    std::vector<SmallMatrix> G_inv;
};

JacobianField jacobian(const GridMap& f);
SingularSpectrumField singular_spectrum(const JacobianField& J);
MetricField induced_metric(const GridMap& f, const JacobianField& J);

/// Singular values of one m x n matrix, nonincreasing.
SmallVector singular_values(const SmallMatrix& A);

// Serialization: {n, m, extents, counts, values} with values node-major,
// axis 0 slowest, components fastest.
nlohmann::json to_json(const GridMap& f);
GridMap map_from_json(const nlohmann::json& doc);
void save_map(const GridMap& f, const std::string& path);
GridMap load_map(const std::string& path);

}  // namespace msl
