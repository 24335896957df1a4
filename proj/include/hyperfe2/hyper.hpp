#ifndef HYPERFE2_HYPER_HPP
#define HYPERFE2_HYPER_HPP

#include "hyperfe2/reduced.hpp"

#include <string>
#include <vector>

namespace hyperfe2 {

/// Integration criteria entering the selection training matrix. Projected
/// internal force and stress reactions form the conventional baseline and
/// are always on; the rest are the additional averaged quantities.
struct CriterionSet {
    bool stress_power = false;
    bool mean_strain = false;
    bool mean_stress = false;
    bool free_energy = false;

    static CriterionSet conventional() { return {}; }
    static CriterionSet additional() { return { true, true, true, true }; }

    std::vector<std::string> names() const;
    static CriterionSet from_names(const std::vector<std::string>& names);
};

/// Per-entity integrated quantities along the training paths, collected at
/// Gauss-point granularity; element quantities are sums over their points.
struct HyperSnapshots {
    std::vector<ReducedSolver::EntityColumns> snaps;
    Eigen::VectorXd gp_volumes;
    std::vector<int> gp_offsets;
    double bulk_volume = 0.0;
    double cell_volume = 0.0;
    int n_modes = 0;

    int candidate_count(HyperMode mode) const;
    Eigen::VectorXd entity_volumes(HyperMode mode) const;
};

/// Marches the solver through every path, committing converged states, and
/// records the entity data of each step. When `hf` is given, states come
/// from high-fidelity solves instead (fallback source).
HyperSnapshots collect_hyper_snapshots(ReducedSolver& rom,
                                       const std::vector<LoadPath>& paths,
                                       MicroSolver* hf = nullptr);

/// Row-normalized stacked criterion blocks; all-but-force blocks carry the
/// per-entity share of the full-integration total subtracted.
struct TrainingMatrix {
    Eigen::MatrixXd rows;
    Eigen::VectorXd volumes;
    double bulk_volume = 0.0;
    std::vector<double> raw_norms;
    std::vector<int> row_snapshot;
    std::vector<std::string> row_block;
    std::vector<double> snapshot_residuals;
    int retained_rows = 0;
    std::vector<std::string> criteria;
    HyperMode mode = HyperMode::Element;
};

TrainingMatrix build_training_matrix(const HyperSnapshots& snaps, HyperMode mode,
                                     const CriterionSet& criteria,
                                     double cutoff_rel = 1e-10);

struct HyperScheme {
    HyperMode mode = HyperMode::Element;
    std::vector<int> entities;
    Eigen::VectorXd weights;
    double residual = 0.0; // squared objective on the normalized matrix
    int directions = 0;    // singular vectors used by the selection
    int target_count = 0;
    std::vector<std::string> criteria;

    EntitySet entity_set() const;
};

/// Greedy selection with exact volume constraint and positive weights.
/// Built once per training matrix (one SVD), then queried per target size.
class SchemeSelector {
public:
    explicit SchemeSelector(const TrainingMatrix& matrix);

    const Eigen::VectorXd& spectrum() const { return spectrum_; }
    HyperScheme select(int target_count) const;

private:
    const TrainingMatrix* matrix_;
    Eigen::MatrixXd directions_; // candidates x rank, scaled rows of lambda
    Eigen::VectorXd spectrum_;
};

void save_scheme(const HyperScheme& scheme, const std::string& path);
HyperScheme load_scheme(const std::string& path);

} // namespace hyperfe2

#endif
