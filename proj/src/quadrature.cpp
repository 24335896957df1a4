#include "hyperfe2/quadrature.hpp"

#include <cmath>

namespace hyperfe2 {

const char* elem_type_name(ElemType type)
{
    switch (type) {
    case ElemType::Tri3: return "tri3";
    case ElemType::Tri6: return "tri6";
    case ElemType::Quad4: return "quad4";
    case ElemType::Quad8R: return "quad8r";
    }
    fail("invalid element type enum");
}

ElemType elem_type_from_name(const std::string& name)
{
    if (name == "tri3") return ElemType::Tri3;
    if (name == "tri6") return ElemType::Tri6;
    if (name == "quad4") return ElemType::Quad4;
    if (name == "quad8r" || name == "quad8-reduced") return ElemType::Quad8R;
    fail("unknown element type '", name, "'");
}

int nodes_per_element(ElemType type)
{
    switch (type) {
    case ElemType::Tri3: return 3;
    case ElemType::Tri6: return 6;
    case ElemType::Quad4: return 4;
    case ElemType::Quad8R: return 8;
    }
    fail("invalid element type enum");
}

namespace {

QuadratureRule make_tri1()
{
    QuadratureRule r;
    r.points.resize(1, 2);
    r.points << 1.0 / 3.0, 1.0 / 3.0;
    r.weights.resize(1);
    r.weights << 0.5;
    return r;
}

QuadratureRule make_tri3()
{
    QuadratureRule r;
    r.points.resize(3, 2);
    r.points << 1.0 / 6.0, 1.0 / 6.0,
        2.0 / 3.0, 1.0 / 6.0,
        1.0 / 6.0, 2.0 / 3.0;
    r.weights = Eigen::VectorXd::Constant(3, 1.0 / 6.0);
    return r;
}

QuadratureRule make_quad4()
{
    const double g = 1.0 / std::sqrt(3.0);
    QuadratureRule r;
    r.points.resize(4, 2);
    r.points << -g, -g, g, -g, g, g, -g, g;
    r.weights = Eigen::VectorXd::Ones(4);
    return r;
}

} // namespace

const QuadratureRule& quadrature_for(ElemType type)
{
    static const QuadratureRule tri1 = make_tri1();
    static const QuadratureRule tri3 = make_tri3();
    static const QuadratureRule quad4 = make_quad4();
    switch (type) {
    case ElemType::Tri3: return tri1;
    case ElemType::Tri6: return tri3;
    case ElemType::Quad4: return quad4;
    case ElemType::Quad8R: return quad4; // reduced integration
    }
    fail("invalid element type enum");
}

} // namespace hyperfe2
