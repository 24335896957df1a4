#include "hyperfe2/twoscale.hpp"

#include <Eigen/SparseLU>

namespace hyperfe2 {

struct MicroCell::Pending {
    // High-fidelity branch
    std::unique_ptr<Eigen::SparseLU<SpMat>> sparse_lu;
    // Reduced branch
    Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu;
    bool dense = false;

    Eigen::MatrixXd k_ue;       // coupling block of the last linearization
    Eigen::VectorXd correction; // -K^{-1} r at the linearization point
};

MicroCell::MicroCell(const MicroSetup& setup) : setup_(setup)
{
    require(setup.cache && setup.materials && setup.map, "incomplete micro setup");
    if (setup.kind == MicroKind::HighFidelity) {
        hf_ = std::make_unique<MicroSolver>(*setup.cache, *setup.materials,
                                            *setup.map, setup.tolerances);
        committed_ = hf_->initial_history();
        iterate_ = Eigen::VectorXd::Zero(setup.map->num_free());
    } else {
        require(setup.basis, "reduced micro setup needs a basis");
        const EntitySet* scheme = nullptr;
        if (setup.kind == MicroKind::Hyper) {
            require(setup.scheme, "hyper micro setup needs a scheme");
            entity_set_ = setup.scheme->entity_set();
            scheme = &entity_set_;
        }
        reduced_ = std::make_unique<ReducedSolver>(*setup.cache, *setup.materials,
                                                   *setup.map, *setup.basis,
                                                   setup.tolerances, scheme);
        committed_ = reduced_->initial_history();
        iterate_ = Eigen::VectorXd::Zero(setup.basis->modes.cols());
    }
    tentative_ = committed_;
}

MicroCell::Linearization MicroCell::linearize(const Voigt2& strain, double dt)
{
    const double volume = setup_.map->volume;
    const double tol_abs = setup_.tolerances.abs_scale
        * reference_modulus(*setup_.materials) * std::sqrt(volume);

    Linearization lin;
    pending_ = std::make_shared<Pending>();
    ++linearizations_;

    if (hf_) {
        MicroSolver::SparseBlocks blocks;
        hf_->linearize(strain, dt, committed_, tentative_, iterate_, blocks);
        pending_->sparse_lu = std::make_unique<Eigen::SparseLU<SpMat>>();
        pending_->sparse_lu->compute(blocks.k_ff);
        require(pending_->sparse_lu->info() == Eigen::Success,
                "micro cell: singular fluctuation stiffness");
        pending_->correction = pending_->sparse_lu->solve(-blocks.residual);
        pending_->k_ue = blocks.k_fe;

        lin.residual = blocks.residual.norm();
        lin.stress = (blocks.reactions + blocks.k_ef * pending_->correction) / volume;
        lin.tangent = (blocks.k_ee
                       - blocks.k_ef * pending_->sparse_lu->solve(blocks.k_fe))
            / volume;
    } else {
        ReducedSolver::DenseBlocks blocks;
        reduced_->linearize(strain, dt, committed_, tentative_, iterate_, blocks);
        pending_->dense = true;
        const int nm = static_cast<int>(blocks.k_uu.rows());
        if (nm > 0) {
            pending_->dense_lu.compute(blocks.k_uu);
            pending_->correction = pending_->dense_lu.solve(-blocks.residual);
            pending_->k_ue = blocks.k_ue;
            lin.residual = blocks.residual.norm();
            lin.stress = (blocks.reactions + blocks.k_eu * pending_->correction)
                / volume;
            lin.tangent = (blocks.k_ee
                           - blocks.k_eu * pending_->dense_lu.solve(blocks.k_ue))
                / volume;
        } else {
            pending_->correction.resize(0);
            pending_->k_ue.resize(0, 3);
            lin.residual = 0.0;
            lin.stress = blocks.reactions / volume;
            lin.tangent = blocks.k_ee / volume;
        }
    }
    // The balance flag uses the absolute floor only; the coupled Newton loop
    // drives the relative part down together with the macro residual.
    lin.balanced = lin.residual <= 10.0 * tol_abs;

    last_response_.strain = strain;
    last_response_.stress = lin.stress;
    last_response_.tangent = lin.tangent;
    last_response_.has_tangent = true;
    last_response_.volume = volume;
    last_response_.bulk_volume = setup_.cache->bulk_volume();
    last_response_.v_rel = last_response_.bulk_volume / volume;
    return lin;
}

void MicroCell::strain_update(const Voigt2& dstrain)
{
    require(pending_ != nullptr, "strain_update without a linearization");
    if (iterate_.size() == 0)
        return;
    if (pending_->dense)
        iterate_ += pending_->correction
            - pending_->dense_lu.solve(pending_->k_ue * dstrain);
    else
        iterate_ += pending_->correction
            - pending_->sparse_lu->solve((pending_->k_ue * dstrain).eval());
}

MacroResponse MicroCell::solve(const Voigt2& strain, double dt)
{
    MacroResponse resp;
    SolveStats stats;
    if (hf_)
        stats = hf_->solve(strain, dt, committed_, tentative_, iterate_, resp, true);
    else
        stats = reduced_->solve(strain, dt, committed_, tentative_, iterate_, resp, true);
    linearizations_ += stats.linearizations;
    last_response_ = resp;
    return resp;
}

void MicroCell::commit()
{
    committed_ = tentative_;
    pending_.reset();
}

void MicroCell::reset_iterate()
{
    tentative_ = committed_;
    pending_.reset();
}

MicroCell::State MicroCell::state() const
{
    return State{ iterate_, committed_ };
}

void MicroCell::set_state(const State& s)
{
    iterate_ = s.iterate;
    committed_ = s.history;
    tentative_ = s.history;
    pending_.reset();
}

TwoScaleSolver::TwoScaleSolver(const MacroProblem& problem,
                               const MicroSetup& setup, TwoScaleOptions options)
    : problem_(&problem), options_(options), cache_(problem.mesh),
      constraints_(resolve_dirichlet(problem)), monitor_(monitor_dofs(problem))
{
    require(!problem.times.empty(), "macro problem has no time stations");
    for (size_t i = 0; i < problem.times.size(); ++i) {
        const double prev = i == 0 ? 0.0 : problem.times[i - 1];
        require(problem.times[i] > prev, "time stations must be increasing");
    }

    const Mesh& mesh = problem.mesh;
    std::vector<bool> constrained(mesh.num_dofs(), false);
    for (int d : constraints_.dofs)
        constrained[d] = true;
    free_index_.assign(mesh.num_dofs(), -1);
    for (int d = 0; d < mesh.num_dofs(); ++d)
        if (!constrained[d]) {
            free_index_[d] = static_cast<int>(free_dofs_.size());
            free_dofs_.push_back(d);
        }

    cells_.reserve(cache_.num_gps());
    for (int g = 0; g < cache_.num_gps(); ++g)
        cells_.emplace_back(setup);

    displacement_ = Eigen::VectorXd::Zero(mesh.num_dofs());
    internal_force_ = Eigen::VectorXd::Zero(mesh.num_dofs());
    gauss_results_.resize(cache_.num_gps());
}

long TwoScaleSolver::micro_linearizations() const
{
    long total = 0;
    for (const MicroCell& c : cells_)
        total += c.linearizations();
    return total;
}

int TwoScaleSolver::try_step(double t_new, double dt)
{
    const Mesh& mesh = problem_->mesh;
    Eigen::VectorXd u = displacement_;
    const Eigen::VectorXd bc_values = constraints_.values_at(t_new);
    for (size_t i = 0; i < constraints_.dofs.size(); ++i)
        u[constraints_.dofs[i]] = bc_values[static_cast<int>(i)];
    const Eigen::VectorXd f_ext = external_load(*problem_, t_new);

    const bool staggered = options_.coupling == CouplingScheme::Staggered;
    double res0 = 0.0;
    Eigen::VectorXd f_int(mesh.num_dofs());
    std::vector<Triplet> trips;
    Eigen::VectorXd u_e;

    for (int it = 0;; ++it) {
        f_int.setZero();
        trips.clear();
        bool balanced = true;

        for (int e = 0; e < mesh.num_elements(); ++e) {
            const auto dofs = mesh.element_dofs(e);
            const int n = static_cast<int>(dofs.size());
            u_e.resize(n);
            for (int i = 0; i < n; ++i)
                u_e[i] = u[dofs[i]];

            Eigen::VectorXd f_e = Eigen::VectorXd::Zero(n);
            Eigen::MatrixXd k_e = Eigen::MatrixXd::Zero(n, n);
            for (int g = 0; g < cache_.gp_count(e); ++g) {
                const auto& geom = cache_.gp(e, g);
                const int id = cache_.gp_offset(e) + g;
                const Voigt2 strain = geom.B * u_e;
                Voigt2 stress;
                Mat3 tangent;
                if (staggered) {
                    const MacroResponse resp = cells_[id].solve(strain, dt);
                    stress = resp.stress;
                    tangent = resp.tangent;
                } else {
                    const MicroCell::Linearization lin =
                        cells_[id].linearize(strain, dt);
                    stress = lin.stress;
                    tangent = lin.tangent;
                    balanced = balanced && lin.balanced;
                }
                f_e += geom.weight * (geom.B.transpose() * stress);
                k_e += geom.weight * (geom.B.transpose() * tangent * geom.B);
                gauss_results_[id] = { geom.weight, stress, strain };
            }
            for (int i = 0; i < n; ++i)
                f_int[dofs[i]] += f_e[i];
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    if (free_index_[dofs[i]] >= 0 && free_index_[dofs[j]] >= 0)
                        trips.emplace_back(free_index_[dofs[i]],
                                           free_index_[dofs[j]], k_e(i, j));
        }

        if (force_floor_ == 0.0) {
            const double c_norm =
                gauss_results_[0].volume > 0.0
                ? cells_[0].last_response().tangent.cwiseAbs().maxCoeff()
                : 1.0;
            const Vec2 span = mesh.bbox_max() - mesh.bbox_min();
            force_floor_ = 1e-12 * c_norm * span.norm();
        }

        Eigen::VectorXd residual(free_dofs_.size());
        for (size_t i = 0; i < free_dofs_.size(); ++i)
            residual[static_cast<int>(i)] =
                f_int[free_dofs_[i]] - f_ext[free_dofs_[i]];
        const double res = residual.norm();
        if (it == 0)
            res0 = res;

        if (res <= options_.macro_rel_tol * res0 + force_floor_ && balanced) {
            displacement_ = u;
            internal_force_ = f_int - f_ext;
            return it;
        }
        if (it >= options_.macro_max_iterations)
            fail("macro solve: no convergence at t = ", t_new, ", residual ", res,
                 " (initial ", res0, ")");

        SpMat k_ff(free_dofs_.size(), free_dofs_.size());
        k_ff.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<SpMat> lu;
        lu.compute(k_ff);
        require(lu.info() == Eigen::Success, "macro stiffness is singular");
        const Eigen::VectorXd du_free = lu.solve(-residual);

        Eigen::VectorXd du = Eigen::VectorXd::Zero(mesh.num_dofs());
        for (size_t i = 0; i < free_dofs_.size(); ++i)
            du[free_dofs_[i]] = du_free[static_cast<int>(i)];
        u += du;

        if (!staggered) {
            Eigen::VectorXd du_e;
            for (int e = 0; e < mesh.num_elements(); ++e) {
                const auto dofs = mesh.element_dofs(e);
                du_e.resize(dofs.size());
                for (size_t i = 0; i < dofs.size(); ++i)
                    du_e[static_cast<int>(i)] = du[dofs[i]];
                for (int g = 0; g < cache_.gp_count(e); ++g) {
                    const auto& geom = cache_.gp(e, g);
                    cells_[cache_.gp_offset(e) + g].strain_update(geom.B * du_e);
                }
            }
        }
    }
}

StepRecord TwoScaleSolver::make_record(double t, int iterations)
{
    StepRecord rec;
    rec.time = t;
    rec.macro_iterations = iterations;
    rec.micro_linearizations = micro_linearizations();
    double u_sum = 0.0;
    double r_sum = 0.0;
    for (int d : monitor_) {
        u_sum += displacement_[d];
        r_sum += internal_force_[d];
    }
    rec.monitor_u = u_sum / static_cast<double>(monitor_.size());
    rec.monitor_r = r_sum;
    for (const auto& [e, g] : problem_->probes) {
        const int id = cache_.gp_offset(e) + g;
        rec.probe_stress.push_back(gauss_results_[id].stress);
        rec.probe_strain.push_back(gauss_results_[id].strain);
    }
    return rec;
}

StepRecord TwoScaleSolver::advance()
{
    require(!finished(), "all time stations already computed");
    const double target = problem_->times[next_station_];
    double sub = target - time_;
    int halvings = 0;
    int iterations = 0;

    while (time_ < target - 1e-14 * target) {
        const double t_try = std::min(time_ + sub, target);
        const Eigen::VectorXd u_saved = displacement_;
        try {
            iterations += try_step(t_try, t_try - time_);
        } catch (const Error& err) {
            displacement_ = u_saved;
            for (MicroCell& c : cells_)
                c.reset_iterate();
            if (++halvings > options_.max_bisections)
                fail("step to t = ", t_try, " failed after ",
                     options_.max_bisections, " bisections: ", err.what());
            sub *= 0.5;
            continue;
        }
        for (MicroCell& c : cells_)
            c.commit();
        time_ = t_try;
    }
    ++next_station_;
    return make_record(time_, iterations);
}

std::vector<StepRecord> TwoScaleSolver::run()
{
    std::vector<StepRecord> records;
    while (!finished())
        records.push_back(advance());
    return records;
}

TwoScaleSolver::State TwoScaleSolver::state() const
{
    State s;
    s.displacement = displacement_;
    s.next_station = next_station_;
    s.time = time_;
    s.cells.reserve(cells_.size());
    for (const MicroCell& c : cells_)
        s.cells.push_back(c.state());
    return s;
}

void TwoScaleSolver::set_state(const State& s)
{
    require(s.cells.size() == cells_.size(), "state has wrong cell count");
    displacement_ = s.displacement;
    next_station_ = s.next_station;
    time_ = s.time;
    for (size_t i = 0; i < cells_.size(); ++i)
        cells_[i].set_state(s.cells[i]);
}

} // namespace hyperfe2
