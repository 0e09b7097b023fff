#pragma once

#include "msl/grid.hpp"

namespace msl {

/// Volume element a(J) = sqrt(det(I + J^T J)) of a graph with differential J
/// (m x n), together with the pieces its derivatives need.
struct DensityEval {
    double a = 1.0;
    SmallMatrix G_inv;  // (I + J^T J)^{-1}, n x n
    SmallMatrix flux;   // da/dJ = a * J * G^{-1}, m x n
};

DensityEval area_density(const SmallMatrix& J);

/// Codimension-one flux grad f / sqrt(1 + |grad f|^2), J of shape 1 x n.
SmallMatrix codim1_flux(const SmallMatrix& J);

/// Second directional derivative d^2/dt^2 a(J + tK) at t = 0:
///   a * ( tr(G^{-1} K^T K) - 1/2 tr(G^{-1} Gd G^{-1} Gd) + 1/4 tr(G^{-1} Gd)^2 ),
/// Gd = K^T J + J^T K.
double density_second(const DensityEval& d, const SmallMatrix& J, const SmallMatrix& K);

/// Matrix M with d^2 a[K, L] = <M, L>_F for every L.
SmallMatrix density_hessian_apply(const DensityEval& d, const SmallMatrix& J, const SmallMatrix& K);

/// Dense (mn x mn) Hessian of a at J, indexed by alpha + m * i.
Eigen::MatrixXd density_hessian(const DensityEval& d, const SmallMatrix& J);

}  // namespace msl
