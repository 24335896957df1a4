#ifndef HYPERFE2_CONSTRAINTS_HPP
#define HYPERFE2_CONSTRAINTS_HPP

#include "hyperfe2/mesh.hpp"
#include "hyperfe2/types.hpp"

#include <array>
#include <vector>

namespace hyperfe2 {

/// One eliminated boundary node and the retained node it follows.
struct NodePair {
    int follower = -1;
    int leader = -1;
    Vec2 delta = Vec2::Zero(); // x_follower - x_leader
};

/// Periodic elimination operators on a rectangular cell.
///
/// Nodal displacements split into a macro-affine part and a periodic
/// fluctuation: u = link * w + affine * [E]. `link` pairs follower boundary
/// nodes to their leaders (unit entries; identity on independent nodes) and
/// `affine` carries the strain-driven part E . (x - x_anchor) for every node,
/// so paired nodes differ by exactly E . (x+ - x-) for any fluctuation.
struct PeriodicMap {
    std::vector<int> independent_nodes; // inner + leader boundary nodes
    std::vector<NodePair> pairs;        // eliminated (minus) side
    SpMat link;                         // n_dof x n_ind
    Eigen::MatrixXd affine;             // n_dof x 3

    int anchor_node = -1;
    std::array<int, 2> anchor_dofs = { -1, -1 }; // independent numbering
    std::vector<int> free_of_ind;                // -1 on anchored entries
    SpMat link_free;                             // n_dof x n_free

    Vec2 box_lo = Vec2::Zero();
    Vec2 box_hi = Vec2::Zero();
    double volume = 0.0; // cell volume (bounding box), pores included

    int num_independent() const { return static_cast<int>(link.cols()); }
    int num_free() const { return static_cast<int>(link_free.cols()); }

    /// Full nodal displacements from free fluctuations and macro strain.
    Eigen::VectorXd expand(const Eigen::VectorXd& w_free, const Voigt2& strain) const;

    /// Independent-dof vector from free dofs (anchored entries zero).
    Eigen::VectorXd independent_from_free(const Eigen::VectorXd& w_free) const;

    /// Projections of a global force vector.
    Eigen::VectorXd reduce_free(const Eigen::VectorXd& force) const;
    Voigt2 reduce_macro(const Eigen::VectorXd& force) const; // V * [Sigma]
};

/// Builds the pairing from the bounding box of the mesh: right follows left,
/// top follows bottom, the three non-master corners follow the corner at the
/// box minimum. anchor_node < 0 picks the master corner.
PeriodicMap build_periodic_map(const Mesh& mesh, double tol, int anchor_node = -1);

} // namespace hyperfe2

#endif
