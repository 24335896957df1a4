#ifndef HYPERFE2_MACRO_PROBLEM_HPP
#define HYPERFE2_MACRO_PROBLEM_HPP

#include "hyperfe2/assembly.hpp"
#include "hyperfe2/mesh.hpp"

#include <array>
#include <vector>

namespace hyperfe2 {

/// Piecewise-linear time table; constant extrapolation beyond the ends.
struct TimeTable {
    std::vector<std::array<double, 2>> samples;

    static TimeTable ramp(double t_end, double amplitude);
    double operator()(double t) const;
};

struct RegionBox {
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Zero();
    bool contains(const Vec2& x) const
    {
        return x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1];
    }
};

struct DirichletBC {
    RegionBox region;
    int comp = 0; // 0 = x, 1 = y, 2 = both
    TimeTable value;
};

struct PointLoadBC {
    RegionBox region; // per-node force on every node inside
    int comp = 0;
    TimeTable value;
};

struct MonitorSet {
    RegionBox region;
    int comp = 1;
};

struct MacroProblem {
    Mesh mesh;
    std::vector<DirichletBC> dirichlet;
    std::vector<PointLoadBC> loads;
    std::vector<double> times; // committed stations, strictly increasing, > 0
    MonitorSet monitor;
    std::vector<std::pair<int, int>> probes; // (element, gauss point)
};

std::vector<int> select_nodes(const Mesh& mesh, const RegionBox& region);

/// Resolved Dirichlet data: constrained dof -> value table index.
struct ConstraintTable {
    std::vector<int> dofs; // sorted, unique
    std::vector<const TimeTable*> tables;

    Eigen::VectorXd values_at(double t) const;
};

ConstraintTable resolve_dirichlet(const MacroProblem& problem);
Eigen::VectorXd external_load(const MacroProblem& problem, double t);
std::vector<int> monitor_dofs(const MacroProblem& problem);

/// Single-scale linear solver with a constant plane tangent; used by the
/// training surrogate. Factorizes once, solves per time station.
class LinearMacroSolver {
public:
    LinearMacroSolver(const MacroProblem& problem, const Mat3& elasticity);

    Eigen::VectorXd solve_at(double t) const;
    /// Strain at every Gauss point for a given displacement field.
    std::vector<Voigt2> gauss_strains(const Eigen::VectorXd& u) const;
    const FemCache& cache() const { return cache_; }

private:
    const MacroProblem* problem_;
    FemCache cache_;
    ConstraintTable constraints_;
    std::vector<int> free_dofs_;
    SpMat k_full_;
    Eigen::SparseLU<SpMat> lu_;
};

} // namespace hyperfe2

#endif
