#include "hyperfe2/pod.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <fstream>

namespace hyperfe2 {

void SnapshotSet::append(const Eigen::VectorXd& column, int path, double time)
{
    if (columns.size() == 0)
        columns.resize(column.size(), 0);
    require(columns.rows() == column.size(), "snapshot length mismatch");
    columns.conservativeResize(Eigen::NoChange, columns.cols() + 1);
    columns.col(columns.cols() - 1) = column;
    meta.push_back({ path, time });
}

ReducedBasis pod(const SnapshotSet& snapshots, const Truncation& truncation)
{
    require(snapshots.columns.cols() > 0, "pod needs at least one snapshot");
    require(snapshots.columns.allFinite(), "snapshot matrix has non-finite entries");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots.columns,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();

    int rank = 0;
    const double cutoff = sv.size() > 0 ? 1e-12 * sv[0] : 0.0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff && sv[i] > 0.0)
            rank = i + 1;

    ReducedBasis basis;
    basis.singular_values = sv.head(rank);
    basis.cumulative_energy.resize(rank);
    const double total = basis.singular_values.sum();
    double acc = 0.0;
    for (int i = 0; i < rank; ++i) {
        acc += basis.singular_values[i];
        basis.cumulative_energy[i] = total > 0.0 ? acc / total : 1.0;
    }

    int n_modes = rank;
    if (truncation.count)
        n_modes = std::min(rank, std::max(0, *truncation.count));
    else if (truncation.energy) {
        n_modes = rank;
        for (int i = 0; i < rank; ++i)
            if (basis.cumulative_energy[i] >= *truncation.energy) {
                n_modes = i + 1;
                break;
            }
    }

    basis.modes = svd.matrixU().leftCols(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        int at = 0;
        basis.modes.col(j).cwiseAbs().maxCoeff(&at);
        if (basis.modes(at, j) < 0.0)
            basis.modes.col(j) = -basis.modes.col(j);
    }
    return basis;
}

void save_basis(const ReducedBasis& basis, const std::string& path)
{
    nlohmann::json j;
    j["rows"] = basis.modes.rows();
    j["modes"] = basis.modes.cols();
    j["singular_values"] =
        std::vector<double>(basis.singular_values.data(),
                            basis.singular_values.data() + basis.singular_values.size());
    j["cumulative_energy"] =
        std::vector<double>(basis.cumulative_energy.data(),
                            basis.cumulative_energy.data() + basis.cumulative_energy.size());
    nlohmann::json cols = nlohmann::json::array();
    for (int c = 0; c < basis.modes.cols(); ++c)
        cols.push_back(std::vector<double>(basis.modes.col(c).data(),
                                           basis.modes.col(c).data() + basis.modes.rows()));
    j["columns"] = std::move(cols);
    std::ofstream out(path);
    require(out.good(), "cannot write basis file '", path, "'");
    out << j.dump() << "\n";
}

ReducedBasis load_basis(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), "cannot open basis file '", path, "'");
    nlohmann::json j;
    in >> j;

    ReducedBasis basis;
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("modes").get<int>();
    basis.modes.resize(rows, cols);
    const auto& columns = j.at("columns");
    require(static_cast<int>(columns.size()) == cols, "basis file '", path,
            "': column count mismatch");
    for (int c = 0; c < cols; ++c) {
        const auto col = columns[c].get<std::vector<double>>();
        require(static_cast<int>(col.size()) == rows, "basis file '", path,
                "': column length mismatch");
        basis.modes.col(c) = Eigen::Map<const Eigen::VectorXd>(col.data(), rows);
    }
    const auto sv = j.at("singular_values").get<std::vector<double>>();
    basis.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(), sv.size());
    const auto ce = j.at("cumulative_energy").get<std::vector<double>>();
    basis.cumulative_energy = Eigen::Map<const Eigen::VectorXd>(ce.data(), ce.size());

    // Orthonormality and ordering are file invariants; fail fast on corruption.
    const Eigen::MatrixXd gram = basis.modes.transpose() * basis.modes;
    require((gram - Eigen::MatrixXd::Identity(cols, cols)).cwiseAbs().maxCoeff() < 1e-10,
            "basis file '", path, "': modes are not orthonormal");
    for (int i = 1; i < basis.singular_values.size(); ++i)
        require(basis.singular_values[i] <= basis.singular_values[i - 1] * (1.0 + 1e-12),
                "basis file '", path, "': singular values not sorted");
    return basis;
}

} // namespace hyperfe2
