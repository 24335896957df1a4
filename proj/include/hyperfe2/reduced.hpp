#ifndef HYPERFE2_REDUCED_HPP
#define HYPERFE2_REDUCED_HPP

#include "hyperfe2/micro_solve.hpp"
#include "hyperfe2/pod.hpp"

namespace hyperfe2 {

/// Under-integration entities: whole elements (standard elements, scalar
/// weights) or single Gauss points (weights scale w detJ).
enum class HyperMode { Element, GaussPoint };

const char* hyper_mode_name(HyperMode mode);
HyperMode hyper_mode_from_name(const std::string& name);

struct EntitySet {
    HyperMode mode = HyperMode::Element;
    std::vector<int> ids;
    Eigen::VectorXd weights;
};

/// Galerkin-projected cell solver on a displacement basis, with optional
/// weighted entity subsets for under-integrated residual and stress.
class ReducedSolver {
public:
    ReducedSolver(const FemCache& cache, const std::vector<Material>& materials,
                  const PeriodicMap& map, const ReducedBasis& basis,
                  MicroTolerances tol = {}, const EntitySet* scheme = nullptr);

    /// Histories cover all Gauss points in full mode, only the scheme's
    /// entities otherwise.
    int history_size() const;
    std::vector<GpHistory> initial_history() const;

    SolveStats solve(const Voigt2& strain, double dt,
                     const std::vector<GpHistory>& hist,
                     std::vector<GpHistory>& hist_out,
                     Eigen::VectorXd& amplitudes, MacroResponse& response,
                     bool want_tangent);

    /// Blocks of one linearization at (amplitudes, strain); used by the
    /// common macro/micro Newton loop.
    struct DenseBlocks {
        Eigen::VectorXd residual;
        Voigt2 reactions = Voigt2::Zero(); // V * Sigma
        Eigen::MatrixXd k_uu;
        Eigen::MatrixXd k_ue;
        Eigen::MatrixXd k_eu;
        Mat3 k_ee = Mat3::Zero();
    };
    void linearize(const Voigt2& strain, double dt,
                   const std::vector<GpHistory>& hist,
                   std::vector<GpHistory>& hist_out,
                   const Eigen::VectorXd& amplitudes, DenseBlocks& out);

    /// Per-entity integrated quantities at a given state (full mode only).
    struct EntityColumns {
        Eigen::MatrixXd forces;    // n_modes x m (projected internal force)
        Eigen::MatrixXd reactions; // 3 x m
        Eigen::MatrixXd strain;    // 3 x m
        Eigen::MatrixXd stress;    // 3 x m
        Eigen::RowVectorXd power;
        Eigen::RowVectorXd energy;
        Eigen::VectorXd volumes;
        double residual_norm = 0.0;
    };
    EntityColumns collect(const Eigen::VectorXd& u_full, double dt,
                          const std::vector<GpHistory>& hist,
                          HyperMode mode) const;

    int num_modes() const { return static_cast<int>(basis_->modes.cols()); }
    int candidate_count(HyperMode mode) const;
    double force_scale() const { return force_scale_; }
    const FemCache& cache() const { return *cache_; }
    const PeriodicMap& map() const { return *map_; }
    const ReducedBasis& basis() const { return *basis_; }
    const EntitySet* scheme() const { return scheme_ ? &scheme_value_ : nullptr; }

private:
    void assemble_blocks(const Voigt2& strain, double dt,
                         const std::vector<GpHistory>& hist,
                         std::vector<GpHistory>& hist_out,
                         const Eigen::VectorXd& amplitudes,
                         DenseBlocks& blocks) const;
    void accumulate_element(int e, double weight, const Eigen::VectorXd& u,
                            const GpHistory* hist, double dt,
                            GpHistory* hist_new, DenseBlocks& blocks,
                            bool want_stiffness) const;
    void accumulate_gp(int e, int g, double weight, const Eigen::VectorXd& u,
                       const GpHistory& hist, double dt, GpHistory& hist_new,
                       DenseBlocks& blocks, bool want_stiffness) const;

    const FemCache* cache_;
    const std::vector<Material>* materials_;
    const PeriodicMap* map_;
    const ReducedBasis* basis_;
    MicroTolerances tol_;
    bool scheme_ = false;
    EntitySet scheme_value_;
    std::vector<int> hist_offset_; // per selected entity
    Eigen::MatrixXd reduced_link_; // n_dof x n_modes
    double force_scale_ = 1.0;
};

} // namespace hyperfe2

#endif
