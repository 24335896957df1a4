#ifndef HYPERFE2_TWOSCALE_HPP
#define HYPERFE2_TWOSCALE_HPP

#include "hyperfe2/hyper.hpp"
#include "hyperfe2/macro_problem.hpp"

#include <memory>

namespace hyperfe2 {

enum class MicroKind { HighFidelity, Reduced, Hyper };
enum class CouplingScheme { Monolithic, Staggered };

/// Immutable cell-model data shared by all macro Gauss points.
struct MicroSetup {
    MicroKind kind = MicroKind::HighFidelity;
    const FemCache* cache = nullptr;
    const std::vector<Material>* materials = nullptr;
    const PeriodicMap* map = nullptr;
    const ReducedBasis* basis = nullptr;   // reduced / hyper
    const HyperScheme* scheme = nullptr;   // hyper
    MicroTolerances tolerances;
};

/// One cell per macro Gauss point: owns its fluctuation (or amplitude)
/// iterate and material histories; evaluates either a single linearization
/// (for the common Newton loop via static condensation) or a converged
/// inner solve.
class MicroCell {
public:
    explicit MicroCell(const MicroSetup& setup);

    struct Linearization {
        Voigt2 stress = Voigt2::Zero(); // corrected for the cell residual
        Mat3 tangent = Mat3::Zero();
        double residual = 0.0;
        bool balanced = false; // residual below the cell tolerance
    };

    /// Assembles at the current iterate and prepares the condensed
    /// correction; the iterate is advanced by strain_update().
    Linearization linearize(const Voigt2& strain, double dt);
    void strain_update(const Voigt2& dstrain);

    /// Fully converged inner solve (staggered coupling).
    MacroResponse solve(const Voigt2& strain, double dt);

    void commit();
    void reset_iterate();

    struct State {
        Eigen::VectorXd iterate;
        std::vector<GpHistory> history;
    };
    State state() const;
    void set_state(const State& s);

    long linearizations() const { return linearizations_; }
    const MacroResponse& last_response() const { return last_response_; }

private:
    void assemble_blocks(const Voigt2& strain, double dt);

    MicroSetup setup_;
    std::unique_ptr<MicroSolver> hf_;
    std::unique_ptr<ReducedSolver> reduced_;
    EntitySet entity_set_; // storage backing the hyper solver

    Eigen::VectorXd iterate_;
    std::vector<GpHistory> committed_;
    std::vector<GpHistory> tentative_;
    long linearizations_ = 0;
    MacroResponse last_response_;

    // Pending condensed correction of the last linearization.
    struct Pending;
    std::shared_ptr<Pending> pending_;
};

struct TwoScaleOptions {
    CouplingScheme coupling = CouplingScheme::Monolithic;
    double macro_rel_tol = 1e-6;
    int macro_max_iterations = 25;
    int max_bisections = 4;
};

struct StepRecord {
    double time = 0.0;
    double monitor_u = 0.0;
    double monitor_r = 0.0;
    int macro_iterations = 0;
    long micro_linearizations = 0; // cumulative
    std::vector<Voigt2> probe_stress;
    std::vector<Voigt2> probe_strain;
};

class TwoScaleSolver {
public:
    TwoScaleSolver(const MacroProblem& problem, const MicroSetup& setup,
                   TwoScaleOptions options = {});

    /// Advances through all remaining time stations.
    std::vector<StepRecord> run();
    /// One committed station (with dt bisection on failure).
    StepRecord advance();
    bool finished() const { return next_station_ >= problem_->times.size(); }

    struct State {
        Eigen::VectorXd displacement;
        std::vector<MicroCell::State> cells;
        size_t next_station = 0;
        double time = 0.0;
    };
    State state() const;
    void set_state(const State& s);

    const Eigen::VectorXd& displacement() const { return displacement_; }
    const Eigen::VectorXd& internal_force() const { return internal_force_; }
    long micro_linearizations() const;
    int macro_gauss_count() const { return cache_.num_gps(); }
    /// (volume, stress, strain) of every macro Gauss point, last converged step.
    struct GaussResult {
        double volume = 0.0;
        Voigt2 stress = Voigt2::Zero();
        Voigt2 strain = Voigt2::Zero();
    };
    const std::vector<GaussResult>& gauss_results() const { return gauss_results_; }

private:
    int try_step(double t_new, double dt); // returns macro iterations
    StepRecord make_record(double t, int iterations);

    const MacroProblem* problem_;
    TwoScaleOptions options_;
    FemCache cache_;
    ConstraintTable constraints_;
    std::vector<int> free_dofs_;
    std::vector<int> free_index_;
    std::vector<int> monitor_;
    std::vector<MicroCell> cells_;

    Eigen::VectorXd displacement_;
    Eigen::VectorXd internal_force_;
    std::vector<GaussResult> gauss_results_;
    size_t next_station_ = 0;
    double time_ = 0.0;
    double force_floor_ = 0.0;
};

} // namespace hyperfe2

#endif
