#ifndef HYPERFE2_TYPES_HPP
#define HYPERFE2_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <sstream>
#include <stdexcept>
#include <string>

namespace hyperfe2 {

// 2D Voigt convention used throughout:
//   strain  (e11, e22, g12) with engineering shear g12 = 2*e12
//   stress  (s11, s22, s12)
// With this pairing the Voigt dot product equals the tensor double
// contraction, so no extra factors appear in B^T*sigma or sigma:deps.
using Voigt2 = Eigen::Vector3d;

// 3D Voigt (11, 22, 33, 12, 13, 23); strains carry engineering shear.
using Voigt3 = Eigen::Matrix<double, 6, 1>;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void format_into(std::ostringstream&) {}
template <class T, class... Rest>
void format_into(std::ostringstream& os, const T& head, const Rest&... rest)
{
    os << head;
    format_into(os, rest...);
}
} // namespace detail

template <class... Args>
std::string cat(const Args&... args)
{
    std::ostringstream os;
    os.precision(17);
    detail::format_into(os, args...);
    return os.str();
}

template <class... Args>
[[noreturn]] void fail(const Args&... args)
{
    throw Error(cat(args...));
}

template <class... Args>
void require(bool condition, const Args&... args)
{
    if (!condition)
        fail(args...);
}

// Tensor double contraction x:x for a 3D Voigt strain (engineering shear).
inline double strain_self_contract(const Voigt3& e)
{
    return e.head<3>().squaredNorm() + 0.5 * e.tail<3>().squaredNorm();
}

// Tensor double contraction s:s for a 3D Voigt stress.
inline double stress_self_contract(const Voigt3& s)
{
    return s.head<3>().squaredNorm() + 2.0 * s.tail<3>().squaredNorm();
}

inline Voigt3 strain_deviator(const Voigt3& e)
{
    Voigt3 d = e;
    const double mean = (e[0] + e[1] + e[2]) / 3.0;
    d[0] -= mean;
    d[1] -= mean;
    d[2] -= mean;
    return d;
}

inline Voigt3 stress_deviator(const Voigt3& s)
{
    return strain_deviator(s); // same arithmetic, shear untouched
}

// von Mises norm sqrt(3/2 s_d : s_d) of a stress.
inline double von_mises(const Voigt3& s)
{
    return std::sqrt(1.5 * stress_self_contract(stress_deviator(s)));
}

// sigma_d = 2 mu * dev(e) for an engineering-shear strain e (stress Voigt out).
inline Voigt3 deviatoric_stress_of_strain(double mu, const Voigt3& e)
{
    Voigt3 d = strain_deviator(e);
    Voigt3 s;
    s.head<3>() = 2.0 * mu * d.head<3>();
    s.tail<3>() = mu * d.tail<3>();
    return s;
}

// Isotropic elasticity matrix acting on engineering-shear Voigt strains.
inline Mat6 isotropic_stiffness(double kappa, double mu)
{
    Mat6 c = Mat6::Zero();
    const double a = kappa + 4.0 * mu / 3.0;
    const double b = kappa - 2.0 * mu / 3.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            c(i, j) = (i == j) ? a : b;
    for (int i = 3; i < 6; ++i)
        c(i, i) = mu;
    return c;
}

} // namespace hyperfe2

#endif
