#include "hyperfe2/shape_functions.hpp"

namespace hyperfe2 {

ShapeEval shape_functions(ElemType type, const Vec2& xi)
{
    const double x = xi[0];
    const double y = xi[1];
    ShapeEval s;
    switch (type) {
    case ElemType::Tri3: {
        s.values.resize(3);
        s.grads.resize(3, 2);
        s.values << 1.0 - x - y, x, y;
        s.grads << -1, -1, 1, 0, 0, 1;
        return s;
    }
    case ElemType::Tri6: {
        // Barycentric l1 = 1-x-y, l2 = x, l3 = y; midside nodes 4..6 on
        // edges (1,2), (2,3), (3,1).
        const double l1 = 1.0 - x - y;
        const double l2 = x;
        const double l3 = y;
        s.values.resize(6);
        s.values << l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), l3 * (2 * l3 - 1),
            4 * l1 * l2, 4 * l2 * l3, 4 * l3 * l1;
        s.grads.resize(6, 2);
        const double dl1 = -1.0;
        s.grads(0, 0) = (4 * l1 - 1) * dl1;
        s.grads(0, 1) = (4 * l1 - 1) * dl1;
        s.grads(1, 0) = 4 * l2 - 1;
        s.grads(1, 1) = 0.0;
        s.grads(2, 0) = 0.0;
        s.grads(2, 1) = 4 * l3 - 1;
        s.grads(3, 0) = 4 * (l1 + l2 * dl1);
        s.grads(3, 1) = 4 * l2 * dl1;
        s.grads(4, 0) = 4 * l3;
        s.grads(4, 1) = 4 * l2;
        s.grads(5, 0) = 4 * l3 * dl1;
        s.grads(5, 1) = 4 * (l1 + l3 * dl1);
        return s;
    }
    case ElemType::Quad4: {
        static const double xn[4] = { -1, 1, 1, -1 };
        static const double yn[4] = { -1, -1, 1, 1 };
        s.values.resize(4);
        s.grads.resize(4, 2);
        for (int i = 0; i < 4; ++i) {
            s.values[i] = 0.25 * (1 + x * xn[i]) * (1 + y * yn[i]);
            s.grads(i, 0) = 0.25 * xn[i] * (1 + y * yn[i]);
            s.grads(i, 1) = 0.25 * yn[i] * (1 + x * xn[i]);
        }
        return s;
    }
    case ElemType::Quad8R: {
        // Serendipity: corners 0..3, midsides 4..7 on edges
        // (0,1), (1,2), (2,3), (3,0).
        static const double xn[4] = { -1, 1, 1, -1 };
        static const double yn[4] = { -1, -1, 1, 1 };
        s.values.resize(8);
        s.grads.resize(8, 2);
        for (int i = 0; i < 4; ++i) {
            const double a = x * xn[i];
            const double b = y * yn[i];
            s.values[i] = 0.25 * (1 + a) * (1 + b) * (a + b - 1);
            s.grads(i, 0) = 0.25 * xn[i] * (1 + b) * (2 * a + b);
            s.grads(i, 1) = 0.25 * yn[i] * (1 + a) * (a + 2 * b);
        }
        static const double xm[4] = { 0, 1, 0, -1 };
        static const double ym[4] = { -1, 0, 1, 0 };
        for (int k = 0; k < 4; ++k) {
            const int i = 4 + k;
            if (xm[k] == 0.0) {
                s.values[i] = 0.5 * (1 - x * x) * (1 + y * ym[k]);
                s.grads(i, 0) = -x * (1 + y * ym[k]);
                s.grads(i, 1) = 0.5 * (1 - x * x) * ym[k];
            } else {
                s.values[i] = 0.5 * (1 + x * xm[k]) * (1 - y * y);
                s.grads(i, 0) = 0.5 * xm[k] * (1 - y * y);
                s.grads(i, 1) = -y * (1 + x * xm[k]);
            }
        }
        return s;
    }
    }
    fail("invalid element type enum");
}

Eigen::Matrix<double, Eigen::Dynamic, 2> parent_nodes(ElemType type)
{
    Eigen::Matrix<double, Eigen::Dynamic, 2> p;
    switch (type) {
    case ElemType::Tri3:
        p.resize(3, 2);
        p << 0, 0, 1, 0, 0, 1;
        return p;
    case ElemType::Tri6:
        p.resize(6, 2);
        p << 0, 0, 1, 0, 0, 1, 0.5, 0, 0.5, 0.5, 0, 0.5;
        return p;
    case ElemType::Quad4:
        p.resize(4, 2);
        p << -1, -1, 1, -1, 1, 1, -1, 1;
        return p;
    case ElemType::Quad8R:
        p.resize(8, 2);
        p << -1, -1, 1, -1, 1, 1, -1, 1, 0, -1, 1, 0, 0, 1, -1, 0;
        return p;
    }
    fail("invalid element type enum");
}

BMatrixEval b_matrix(ElemType type,
                     const Eigen::Matrix<double, Eigen::Dynamic, 2>& coords,
                     const Vec2& xi)
{
    const ShapeEval s = shape_functions(type, xi);
    const int n = static_cast<int>(s.values.size());
    require(coords.rows() == n, "b_matrix: expected ", n, " nodes for ",
            elem_type_name(type), ", got ", coords.rows());

    const Mat2 jac = s.grads.transpose() * coords; // J_ab = sum_i dN_i/dxi_a x_i,b
    BMatrixEval out;
    out.det_jacobian = jac.determinant();
    if (!(out.det_jacobian > 0.0))
        fail("inverted element: det(J) = ", out.det_jacobian, " at xi = (",
             xi[0], ", ", xi[1], ")");

    out.grads_x = s.grads * jac.inverse(); // row i: (dN_i/dx, dN_i/dy)
    out.B.resize(3, 2 * n);
    out.B.setZero();
    for (int i = 0; i < n; ++i) {
        const double dx = out.grads_x(i, 0);
        const double dy = out.grads_x(i, 1);
        out.B(0, 2 * i) = dx;
        out.B(1, 2 * i + 1) = dy;
        out.B(2, 2 * i) = dy;
        out.B(2, 2 * i + 1) = dx;
    }
    return out;
}

} // namespace hyperfe2
