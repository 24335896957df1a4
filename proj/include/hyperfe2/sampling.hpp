#ifndef HYPERFE2_SAMPLING_HPP
#define HYPERFE2_SAMPLING_HPP

#include "hyperfe2/macro_problem.hpp"
#include "hyperfe2/micro_solve.hpp"

#include <cstdint>

namespace hyperfe2 {

/// Strain trajectories at common time stations, one per macro Gauss point.
struct PathEnsemble {
    std::vector<Eigen::MatrixXd> paths; // each steps x 3 (Voigt)
    Eigen::VectorXd times;
    std::vector<int> source_gp;

    int count() const { return static_cast<int>(paths.size()); }
};

/// Runs the macro problem with a constant effective elasticity and harvests
/// the strain path of every macro Gauss point.
PathEnsemble surrogate_macro_run(const MacroProblem& problem,
                                 const Mat3& elasticity);

struct ClusterResult {
    std::vector<Eigen::MatrixXd> centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
};

/// Lloyd iterations on flattened trajectories with k-means++ seeding;
/// deterministic for a fixed seed. Empty clusters reseed from the farthest
/// path.
ClusterResult cluster_paths(const PathEnsemble& ensemble, int k, std::uint64_t seed);

std::vector<LoadPath> centroid_load_paths(const ClusterResult& clusters,
                                          const Eigen::VectorXd& times);

} // namespace hyperfe2

#endif
