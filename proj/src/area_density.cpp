#include "msl/area_density.hpp"

#include <cmath>

namespace msl {

DensityEval area_density(const SmallMatrix& J) {
    const auto n = J.cols();
    SmallMatrix G = SmallMatrix::Identity(n, n);
    G.noalias() += J.transpose() * J;
    Eigen::LLT<SmallMatrix> llt(G);
    DensityEval out;
    // det G = prod(L_ii)^2, so sqrt(det G) = prod(L_ii).
    out.a = llt.matrixLLT().diagonal().prod();
    out.G_inv = llt.solve(SmallMatrix::Identity(n, n));
    out.flux = out.a * (J * out.G_inv);
    return out;
}

SmallMatrix codim1_flux(const SmallMatrix& J) {
    const double q = std::sqrt(1.0 + J.squaredNorm());
    return J / q;
}

double density_second(const DensityEval& d, const SmallMatrix& J, const SmallMatrix& K) {
    const SmallMatrix Gd = K.transpose() * J + J.transpose() * K;
    const SmallMatrix GiGd = d.G_inv * Gd;
    const double dirichlet = (d.G_inv * (K.transpose() * K)).trace();
    const double cross = (GiGd * GiGd).trace();
    const double tr = GiGd.trace();
    return d.a * (dirichlet - 0.5 * cross + 0.25 * tr * tr);
}

SmallMatrix density_hessian_apply(const DensityEval& d, const SmallMatrix& J, const SmallMatrix& K) {
    const SmallMatrix Gd = K.transpose() * J + J.transpose() * K;
    const SmallMatrix S = d.G_inv * Gd * d.G_inv;
    const double tr = (d.G_inv * Gd).trace();
    return d.a * (K * d.G_inv - J * S + 0.5 * tr * (J * d.G_inv));
}

Eigen::MatrixXd density_hessian(const DensityEval& d, const SmallMatrix& J) {
    const auto m = J.rows();
    const auto n = J.cols();
    Eigen::MatrixXd H(m * n, m * n);
    SmallMatrix E = SmallMatrix::Zero(m, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index a = 0; a < m; ++a) {
            E(a, i) = 1.0;
            const SmallMatrix M = density_hessian_apply(d, J, E);
            E(a, i) = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index b = 0; b < m; ++b) H(b + m * j, a + m * i) = M(b, j);
            }
        }
    }
    return H;
}

}  // namespace msl
