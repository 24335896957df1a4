#ifndef HYPERFE2_POD_HPP
#define HYPERFE2_POD_HPP

#include "hyperfe2/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hyperfe2 {

/// Columns are solution vectors on the independent dofs.
struct SnapshotSet {
    Eigen::MatrixXd columns;
    struct Meta {
        int path = 0;
        double time = 0.0;
    };
    std::vector<Meta> meta;

    void append(const Eigen::VectorXd& column, int path, double time);
};

struct Truncation {
    std::optional<int> count;
    std::optional<double> energy; // cumulative singular-value fraction
};

struct ReducedBasis {
    Eigen::MatrixXd modes;           // orthonormal columns
    Eigen::VectorXd singular_values; // full spectrum, non-increasing
    Eigen::VectorXd cumulative_energy; // fraction of the singular-value sum

    int size() const { return static_cast<int>(modes.cols()); }
};

/// Truncated SVD of the snapshot matrix. Modes are sign-fixed so the entry
/// of largest magnitude is positive. The energy criterion uses the
/// cumulative sum of singular values normalized by the total sum.
ReducedBasis pod(const SnapshotSet& snapshots, const Truncation& truncation);

/// Portable JSON basis file (matrix inlined as arrays).
void save_basis(const ReducedBasis& basis, const std::string& path);
ReducedBasis load_basis(const std::string& path);

} // namespace hyperfe2

#endif
