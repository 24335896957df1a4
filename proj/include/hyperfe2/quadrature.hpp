#ifndef HYPERFE2_QUADRATURE_HPP
#define HYPERFE2_QUADRATURE_HPP

#include "hyperfe2/types.hpp"

namespace hyperfe2 {

enum class ElemType { Tri3, Tri6, Quad4, Quad8R };

const char* elem_type_name(ElemType type);
ElemType elem_type_from_name(const std::string& name);
int nodes_per_element(ElemType type);

/// Gauss rule in the parent domain; weights sum to the parent volume.
struct QuadratureRule {
    Eigen::Matrix<double, Eigen::Dynamic, 2> points;
    Eigen::VectorXd weights;

    int count() const { return static_cast<int>(weights.size()); }
};

/// Fixed rules: tri3 1-point, tri6 3-point, quad4 and quad8 (reduced) 2x2.
const QuadratureRule& quadrature_for(ElemType type);

} // namespace hyperfe2

#endif
