#ifndef HYPERFE2_MICRO_SOLVE_HPP
#define HYPERFE2_MICRO_SOLVE_HPP

#include "hyperfe2/assembly.hpp"
#include "hyperfe2/constraints.hpp"

#include <string>
#include <vector>

namespace hyperfe2 {

struct MicroTolerances {
    double rel = 1e-8;
    double abs_scale = 1e-10; // absolute tol = abs_scale * E_ref * sqrt(V)
    int max_iterations = 25;
};

struct SolveStats {
    int iterations = 0;
    int linearizations = 0;
    std::vector<double> residual_history;
    double residual = 0.0;
};

struct MacroResponse {
    Voigt2 strain = Voigt2::Zero();
    Voigt2 stress = Voigt2::Zero();
    Mat3 tangent = Mat3::Zero();
    bool has_tangent = false;
    double volume = 0.0;      // cell volume
    double bulk_volume = 0.0; // meshed volume
    double v_rel = 0.0;
};

/// Newton solver for the cell problem at prescribed macro strain, with macro
/// stress from the strain-conjugate reactions and the condensed tangent by
/// static condensation of the fluctuation block.
class MicroSolver {
public:
    MicroSolver(const FemCache& cache, const std::vector<Material>& materials,
                const PeriodicMap& map, MicroTolerances tol = {});

    std::vector<GpHistory> initial_history() const;

    /// w_free is the warm-start fluctuation, updated in place. hist_out holds
    /// the tentative histories at the converged state; committing is the
    /// caller's decision.
    SolveStats solve(const Voigt2& strain, double dt,
                     const std::vector<GpHistory>& hist,
                     std::vector<GpHistory>& hist_out, Eigen::VectorXd& w_free,
                     MacroResponse& response, bool want_tangent);

    /// Outer Newton on the macro strain to hit a stress target.
    SolveStats solve_stress(const Voigt2& stress_target, double dt,
                            const std::vector<GpHistory>& hist,
                            std::vector<GpHistory>& hist_out,
                            Eigen::VectorXd& w_free, Voigt2& strain_inout,
                            MacroResponse& response, bool want_tangent);

    /// Blocks of one linearization at (w_free, strain); used by the common
    /// macro/micro Newton loop.
    struct SparseBlocks {
        Eigen::VectorXd residual; // free dofs
        Voigt2 reactions;         // V * Sigma
        SpMat k_ff;
        Eigen::MatrixXd k_fe; // free x 3
        Eigen::MatrixXd k_ef; // 3 x free
        Mat3 k_ee;
    };
    void linearize(const Voigt2& strain, double dt,
                   const std::vector<GpHistory>& hist,
                   std::vector<GpHistory>& hist_out,
                   const Eigen::VectorXd& w_free, SparseBlocks& out);

    double force_scale() const { return force_scale_; }
    const PeriodicMap& map() const { return *map_; }
    const FemCache& cache() const { return *cache_; }
    const std::vector<Material>& materials() const { return *materials_; }
    const MicroTolerances& tolerances() const { return tol_; }

private:
    const FemCache* cache_;
    const std::vector<Material>* materials_;
    const PeriodicMap* map_;
    MicroTolerances tol_;
    SparseAssembler assembler_;
    double force_scale_ = 1.0;
};

/// Strain (or stress) path over time; Voigt with engineering shear.
struct LoadPath {
    Eigen::VectorXd times;
    Eigen::Matrix<double, Eigen::Dynamic, 3> values;
    bool stress_driven = false;

    int steps() const { return static_cast<int>(times.size()); }
};

/// CSV with header "t,E11,E22,E12" (tensorial shear, halved on write) or
/// "t,S11,S22,S12" for stress-driven paths.
LoadPath load_path_csv(const std::string& path);
void save_load_path_csv(const LoadPath& path, const std::string& file);

/// Largest elastic modulus over the material set, used for scaling.
double reference_modulus(const std::vector<Material>& materials);

} // namespace hyperfe2

#endif
