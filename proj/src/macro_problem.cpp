#include "hyperfe2/macro_problem.hpp"

#include <Eigen/SparseLU>

#include <algorithm>

namespace hyperfe2 {

TimeTable TimeTable::ramp(double t_end, double amplitude)
{
    return TimeTable{ { { 0.0, 0.0 }, { t_end, amplitude } } };
}

double TimeTable::operator()(double t) const
{
    require(!samples.empty(), "empty time table");
    if (t <= samples.front()[0])
        return samples.front()[1];
    for (size_t i = 1; i < samples.size(); ++i) {
        if (t <= samples[i][0]) {
            const double t0 = samples[i - 1][0];
            const double t1 = samples[i][0];
            const double s = (t - t0) / (t1 - t0);
            return (1.0 - s) * samples[i - 1][1] + s * samples[i][1];
        }
    }
    return samples.back()[1];
}

std::vector<int> select_nodes(const Mesh& mesh, const RegionBox& region)
{
    std::vector<int> out;
    for (int i = 0; i < mesh.num_nodes(); ++i)
        if (region.contains(mesh.nodes[i]))
            out.push_back(i);
    return out;
}

ConstraintTable resolve_dirichlet(const MacroProblem& problem)
{
    ConstraintTable table;
    std::vector<std::pair<int, const TimeTable*>> entries;
    for (const DirichletBC& bc : problem.dirichlet) {
        const auto nodes = select_nodes(problem.mesh, bc.region);
        require(!nodes.empty(), "dirichlet region selects no nodes");
        for (int n : nodes) {
            if (bc.comp == 0 || bc.comp == 2)
                entries.emplace_back(2 * n, &bc.value);
            if (bc.comp == 1 || bc.comp == 2)
                entries.emplace_back(2 * n + 1, &bc.value);
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [dof, tab] : entries) {
        if (!table.dofs.empty() && table.dofs.back() == dof)
            continue; // first declaration wins
        table.dofs.push_back(dof);
        table.tables.push_back(tab);
    }
    return table;
}

Eigen::VectorXd ConstraintTable::values_at(double t) const
{
    Eigen::VectorXd v(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i)
        v[static_cast<int>(i)] = (*tables[i])(t);
    return v;
}

Eigen::VectorXd external_load(const MacroProblem& problem, double t)
{
    Eigen::VectorXd f = Eigen::VectorXd::Zero(problem.mesh.num_dofs());
    for (const PointLoadBC& bc : problem.loads) {
        const auto nodes = select_nodes(problem.mesh, bc.region);
        for (int n : nodes)
            f[2 * n + bc.comp] += bc.value(t);
    }
    return f;
}

std::vector<int> monitor_dofs(const MacroProblem& problem)
{
    std::vector<int> dofs;
    for (int n : select_nodes(problem.mesh, problem.monitor.region))
        dofs.push_back(2 * n + problem.monitor.comp);
    require(!dofs.empty(), "monitor region selects no nodes");
    return dofs;
}

LinearMacroSolver::LinearMacroSolver(const MacroProblem& problem,
                                     const Mat3& elasticity)
    : problem_(&problem), cache_(problem.mesh),
      constraints_(resolve_dirichlet(problem))
{
    const Mesh& mesh = problem.mesh;
    std::vector<Triplet> trips;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        const int n = static_cast<int>(dofs.size());
        Eigen::MatrixXd k_e = Eigen::MatrixXd::Zero(n, n);
        for (int g = 0; g < cache_.gp_count(e); ++g) {
            const auto& geom = cache_.gp(e, g);
            k_e += geom.weight * (geom.B.transpose() * elasticity * geom.B);
        }
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                trips.emplace_back(dofs[i], dofs[j], k_e(i, j));
    }
    k_full_.resize(mesh.num_dofs(), mesh.num_dofs());
    k_full_.setFromTriplets(trips.begin(), trips.end());

    std::vector<bool> constrained(mesh.num_dofs(), false);
    for (int d : constraints_.dofs)
        constrained[d] = true;
    for (int d = 0; d < mesh.num_dofs(); ++d)
        if (!constrained[d])
            free_dofs_.push_back(d);

    std::vector<int> free_index(mesh.num_dofs(), -1);
    for (size_t i = 0; i < free_dofs_.size(); ++i)
        free_index[free_dofs_[i]] = static_cast<int>(i);

    std::vector<Triplet> ftrips;
    for (int k = 0; k < k_full_.outerSize(); ++k)
        for (SpMat::InnerIterator it(k_full_, k); it; ++it)
            if (free_index[it.row()] >= 0 && free_index[it.col()] >= 0)
                ftrips.emplace_back(free_index[it.row()], free_index[it.col()],
                                    it.value());
    SpMat k_ff(free_dofs_.size(), free_dofs_.size());
    k_ff.setFromTriplets(ftrips.begin(), ftrips.end());
    lu_.compute(k_ff);
    require(lu_.info() == Eigen::Success,
            "surrogate macro stiffness is singular (check boundary conditions)");
}

Eigen::VectorXd LinearMacroSolver::solve_at(double t) const
{
    const Mesh& mesh = problem_->mesh;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.num_dofs());
    const Eigen::VectorXd vals = constraints_.values_at(t);
    for (size_t i = 0; i < constraints_.dofs.size(); ++i)
        u[constraints_.dofs[i]] = vals[static_cast<int>(i)];

    Eigen::VectorXd rhs_full = external_load(*problem_, t) - k_full_ * u;
    Eigen::VectorXd rhs(free_dofs_.size());
    for (size_t i = 0; i < free_dofs_.size(); ++i)
        rhs[static_cast<int>(i)] = rhs_full[free_dofs_[i]];
    const Eigen::VectorXd u_f = lu_.solve(rhs);
    for (size_t i = 0; i < free_dofs_.size(); ++i)
        u[free_dofs_[i]] = u_f[static_cast<int>(i)];
    return u;
}

std::vector<Voigt2> LinearMacroSolver::gauss_strains(const Eigen::VectorXd& u) const
{
    const Mesh& mesh = problem_->mesh;
    std::vector<Voigt2> strains;
    strains.reserve(cache_.num_gps());
    Eigen::VectorXd u_e;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        u_e.resize(dofs.size());
        for (size_t i = 0; i < dofs.size(); ++i)
            u_e[static_cast<int>(i)] = u[dofs[i]];
        for (int g = 0; g < cache_.gp_count(e); ++g)
            strains.push_back(cache_.gp(e, g).B * u_e);
    }
    return strains;
}

} // namespace hyperfe2
