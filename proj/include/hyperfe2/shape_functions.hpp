#ifndef HYPERFE2_SHAPE_FUNCTIONS_HPP
#define HYPERFE2_SHAPE_FUNCTIONS_HPP

#include "hyperfe2/quadrature.hpp"
#include "hyperfe2/types.hpp"

namespace hyperfe2 {

/// Shape values and parent-space gradients at one evaluation point.
struct ShapeEval {
    Eigen::VectorXd values;                          // N_i, sums to 1
    Eigen::Matrix<double, Eigen::Dynamic, 2> grads;  // dN_i/dxi, dN_i/deta
};

ShapeEval shape_functions(ElemType type, const Vec2& xi);

/// Parent-domain node coordinates (interpolation points).
Eigen::Matrix<double, Eigen::Dynamic, 2> parent_nodes(ElemType type);

/// Strain-displacement operator at xi: [e11, e22, g12] = B * u_e.
/// Throws on detJ <= 0 (inverted element).
struct BMatrixEval {
    Eigen::Matrix<double, 3, Eigen::Dynamic> B;
    Eigen::Matrix<double, Eigen::Dynamic, 2> grads_x; // physical gradients
    double det_jacobian = 0.0;
};

BMatrixEval b_matrix(ElemType type,
                     const Eigen::Matrix<double, Eigen::Dynamic, 2>& coords,
                     const Vec2& xi);

} // namespace hyperfe2

#endif
