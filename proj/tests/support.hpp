#ifndef HYPERFE2_TEST_SUPPORT_HPP
#define HYPERFE2_TEST_SUPPORT_HPP

#include "hyperfe2/materials.hpp"
#include "hyperfe2/meshgen.hpp"
#include "hyperfe2/micro_solve.hpp"

#include <random>

namespace hyperfe2::testing {

inline double rel_err(double value, double reference)
{
    return std::abs(value - reference) / std::max(1e-300, std::abs(reference));
}

inline double rel_err(const Eigen::MatrixXd& value, const Eigen::MatrixXd& reference)
{
    const double scale = std::max(1e-300, reference.cwiseAbs().maxCoeff());
    return (value - reference).cwiseAbs().maxCoeff() / scale;
}

// 3D elasticity oracle: plane strain slices rows/cols, plane stress
// condenses the out-of-plane normal component.
inline Mat3 plane_strain_oracle(double youngs, double poisson)
{
    const double kappa = youngs / (3.0 * (1.0 - 2.0 * poisson));
    const double mu = youngs / (2.0 * (1.0 + poisson));
    const Mat6 c = isotropic_stiffness(kappa, mu);
    Mat3 out;
    const int idx[3] = { 0, 1, 3 };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = c(idx[i], idx[j]);
    return out;
}

inline Mat3 plane_stress_oracle(double youngs, double poisson)
{
    const double kappa = youngs / (3.0 * (1.0 - 2.0 * poisson));
    const double mu = youngs / (2.0 * (1.0 + poisson));
    const Mat6 c = isotropic_stiffness(kappa, mu);
    // Condense sigma_33 = 0: C_pp - C_p3 C_33^{-1} C_3p on (11, 22, 12).
    Mat3 out;
    const int idx[3] = { 0, 1, 3 };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = c(idx[i], idx[j]) - c(idx[i], 2) * c(2, idx[j]) / c(2, 2);
    return out;
}

// Analytic monotonic pure-shear response of the linear-hardening model:
// bilinear in the equivalent measure.
inline double j2_shear_stress_oracle(const J2Params& p, double gamma)
{
    const double mu = p.elastic.shear();
    const double eq_trial = std::sqrt(3.0) * mu * gamma;
    if (eq_trial <= p.yield0)
        return mu * gamma;
    const double r = (eq_trial - p.yield0) / (3.0 * mu + p.hardening);
    return (p.yield0 + p.hardening * r) / std::sqrt(3.0);
}

inline Material elastic_material(double youngs, double poisson,
                                 bool plane_stress = false)
{
    return Material{ ElasticParams{ youngs, poisson, plane_stress } };
}

// Relative properties of the composite benchmark: soft elasto-plastic
// matrix, yield at 1% of its modulus, hardening 1.6%.
inline Material matrix_material(double youngs = 1000.0)
{
    J2Params p;
    p.elastic = { youngs, 0.3, false };
    p.yield0 = 0.01 * youngs;
    p.hardening = 0.016 * youngs;
    return Material{ p };
}

inline Material inclusion_material(double matrix_youngs = 1000.0)
{
    return elastic_material(10.0 * matrix_youngs, 0.3);
}

inline VevpParams vevp_params(int branches = 2, bool implex = false)
{
    VevpParams p;
    p.elastic = { 3000.0, 0.35, false };
    for (int i = 0; i < branches; ++i)
        p.branches.push_back({ 1500.0 / (i + 1), 40.0 * (i + 1) });
    p.visc_drag = 150.0;
    p.rate_exponent = 1.3;
    p.yield0 = 18.0;
    p.hard_modulus = 300.0;
    p.hard_exponent = 0.45;
    p.damage_resistance = 2.0;
    p.damage_exponent = 1.1;
    p.implex = implex;
    return p;
}

// Composite cell: two stiff inclusions and one pore in the unit square.
inline Mesh composite_cell_mesh(int n, ElemType type = ElemType::Tri6)
{
    const auto phases = circular_phases(
        {
            { Vec2(0.30, 0.32), 0.16, 1 },
            { Vec2(0.72, 0.70), 0.14, 1 },
            { Vec2(0.68, 0.22), 0.10, 1 },
            { Vec2(0.28, 0.74), 0.11, -1 },
        },
        0);
    return structured_mesh(type, n, n, 1.0, 1.0, phases);
}

// Two-phase cell without pores (stiff inclusion in a softer matrix).
inline Mesh two_phase_mesh(int n, ElemType type = ElemType::Tri6)
{
    const auto phases = circular_phases({ { Vec2(0.5, 0.5), 0.25, 1 } }, 0);
    return structured_mesh(type, n, n, 1.0, 1.0, phases);
}

inline LoadPath ramp_path(const Voigt2& target, int steps, double t_end = 1.0)
{
    LoadPath p;
    p.times.resize(steps);
    p.values.resize(steps, 3);
    for (int i = 0; i < steps; ++i) {
        p.times[i] = t_end * (i + 1) / steps;
        p.values.row(i) = (target * (i + 1) / steps).transpose();
    }
    return p;
}

struct PathRun {
    std::vector<GpHistory> history;
    Eigen::VectorXd w;
    std::vector<Eigen::VectorXd> snapshots; // independent dofs per step
    std::vector<MacroResponse> responses;
};

inline PathRun march_path(MicroSolver& solver, const LoadPath& path,
                          bool want_tangent = false)
{
    PathRun run;
    run.history = solver.initial_history();
    std::vector<GpHistory> hist_new;
    double t_prev = 0.0;
    for (int i = 0; i < path.steps(); ++i) {
        const double dt = path.times[i] - t_prev;
        if (dt <= 0.0)
            continue;
        t_prev = path.times[i];
        MacroResponse resp;
        solver.solve(path.values.row(i).transpose(), dt, run.history, hist_new,
                     run.w, resp, want_tangent);
        run.history = hist_new;
        run.snapshots.push_back(solver.map().independent_from_free(run.w));
        run.responses.push_back(resp);
    }
    return run;
}

} // namespace hyperfe2::testing

#endif
