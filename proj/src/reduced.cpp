#include "hyperfe2/reduced.hpp"

#include <Eigen/LU>

#include <sstream>

namespace hyperfe2 {

const char* hyper_mode_name(HyperMode mode)
{
    return mode == HyperMode::Element ? "eheim" : "ecm";
}

HyperMode hyper_mode_from_name(const std::string& name)
{
    if (name == "eheim" || name == "element")
        return HyperMode::Element;
    if (name == "ecm" || name == "gauss-point")
        return HyperMode::GaussPoint;
    fail("unknown hyper mode '", name, "'");
}

namespace {

void reset_blocks(ReducedSolver::DenseBlocks& b, int n_modes)
{
    b.residual.setZero(n_modes);
    b.reactions.setZero();
    b.k_uu.setZero(n_modes, n_modes);
    b.k_ue.setZero(n_modes, 3);
    b.k_eu.setZero(3, n_modes);
    b.k_ee.setZero();
}

} // namespace

ReducedSolver::ReducedSolver(const FemCache& cache,
                             const std::vector<Material>& materials,
                             const PeriodicMap& map, const ReducedBasis& basis,
                             MicroTolerances tol, const EntitySet* scheme)
    : cache_(&cache), materials_(&materials), map_(&map), basis_(&basis),
      tol_(tol)
{
    require(basis.modes.rows() == map.num_independent(),
            "basis has ", basis.modes.rows(), " rows, constraint system has ",
            map.num_independent(), " independent dofs");
    reduced_link_ = map.link * basis.modes;
    force_scale_ = reference_modulus(materials) * std::sqrt(map.volume);

    if (scheme) {
        scheme_ = true;
        scheme_value_ = *scheme;
        require(scheme_value_.weights.size()
                    == static_cast<int>(scheme_value_.ids.size()),
                "entity set: ids and weights disagree");
        const int limit = candidate_count(scheme_value_.mode);
        hist_offset_.resize(scheme_value_.ids.size() + 1, 0);
        for (size_t k = 0; k < scheme_value_.ids.size(); ++k) {
            const int id = scheme_value_.ids[k];
            require(id >= 0 && id < limit, "entity id ", id, " out of range");
            const int slots = scheme_value_.mode == HyperMode::Element
                ? cache.gp_count(id)
                : 1;
            hist_offset_[k + 1] = hist_offset_[k] + slots;
        }
    }
}

int ReducedSolver::candidate_count(HyperMode mode) const
{
    return mode == HyperMode::Element ? cache_->mesh().num_elements()
                                      : cache_->num_gps();
}

int ReducedSolver::history_size() const
{
    if (!scheme_)
        return cache_->num_gps();
    return hist_offset_.back();
}

std::vector<GpHistory> ReducedSolver::initial_history() const
{
    std::vector<GpHistory> hist(history_size());
    const Mesh& mesh = cache_->mesh();
    auto init_of = [&](int e) {
        return (*materials_)[mesh.elements[e].material].initial_state();
    };
    if (!scheme_) {
        for (int e = 0; e < mesh.num_elements(); ++e)
            for (int g = 0; g < cache_->gp_count(e); ++g)
                hist[cache_->gp_offset(e) + g].state = init_of(e);
        return hist;
    }
    for (size_t k = 0; k < scheme_value_.ids.size(); ++k) {
        const int id = scheme_value_.ids[k];
        if (scheme_value_.mode == HyperMode::Element) {
            for (int g = 0; g < cache_->gp_count(id); ++g)
                hist[hist_offset_[k] + g].state = init_of(id);
        } else {
            // Flat Gauss index -> owning element.
            int e = 0;
            while (cache_->gp_offset(e + 1) <= id)
                ++e;
            hist[hist_offset_[k]].state = init_of(e);
        }
    }
    return hist;
}

void ReducedSolver::accumulate_element(int e, double weight,
                                       const Eigen::VectorXd& u,
                                       const GpHistory* hist, double dt,
                                       GpHistory* hist_new, DenseBlocks& blocks,
                                       bool want_stiffness) const
{
    const Mesh& mesh = cache_->mesh();
    const auto dofs = mesh.element_dofs(e);
    const int n = static_cast<int>(dofs.size());
    Eigen::VectorXd u_e(n);
    for (int i = 0; i < n; ++i)
        u_e[i] = u[dofs[i]];

    ElementEval eval;
    evaluate_element(*cache_, e, (*materials_)[mesh.elements[e].material],
                     hist, u_e, dt, hist_new, eval);

    Eigen::MatrixXd modes_e(n, num_modes());
    Eigen::MatrixXd affine_e(n, 3);
    for (int i = 0; i < n; ++i) {
        modes_e.row(i) = reduced_link_.row(dofs[i]);
        affine_e.row(i) = map_->affine.row(dofs[i]);
    }

    blocks.residual += weight * (modes_e.transpose() * eval.force);
    blocks.reactions += weight * (affine_e.transpose() * eval.force);
    if (want_stiffness) {
        const Eigen::MatrixXd km = eval.stiffness * modes_e;
        const Eigen::MatrixXd ka = eval.stiffness * affine_e;
        blocks.k_uu += weight * (modes_e.transpose() * km);
        blocks.k_ue += weight * (modes_e.transpose() * ka);
        blocks.k_eu += weight * (affine_e.transpose() * km);
        blocks.k_ee += weight * (affine_e.transpose() * ka);
    }
}

void ReducedSolver::accumulate_gp(int e, int g, double weight,
                                  const Eigen::VectorXd& u,
                                  const GpHistory& hist, double dt,
                                  GpHistory& hist_new, DenseBlocks& blocks,
                                  bool want_stiffness) const
{
    const Mesh& mesh = cache_->mesh();
    const auto dofs = mesh.element_dofs(e);
    const int n = static_cast<int>(dofs.size());
    Eigen::VectorXd u_e(n);
    for (int i = 0; i < n; ++i)
        u_e[i] = u[dofs[i]];

    GaussPointData gp;
    Eigen::MatrixXd k_gp;
    GpHistory hist_tmp;
    evaluate_gauss_point(*cache_, e, g, (*materials_)[mesh.elements[e].material],
                         hist, u_e, dt, hist_tmp, gp,
                         want_stiffness ? &k_gp : nullptr);
    hist_new = hist_tmp;

    Eigen::MatrixXd modes_e(n, num_modes());
    Eigen::MatrixXd affine_e(n, 3);
    for (int i = 0; i < n; ++i) {
        modes_e.row(i) = reduced_link_.row(dofs[i]);
        affine_e.row(i) = map_->affine.row(dofs[i]);
    }

    blocks.residual += weight * (modes_e.transpose() * gp.force);
    blocks.reactions += weight * (affine_e.transpose() * gp.force);
    if (want_stiffness) {
        const Eigen::MatrixXd km = k_gp * modes_e;
        const Eigen::MatrixXd ka = k_gp * affine_e;
        blocks.k_uu += weight * (modes_e.transpose() * km);
        blocks.k_ue += weight * (modes_e.transpose() * ka);
        blocks.k_eu += weight * (affine_e.transpose() * km);
        blocks.k_ee += weight * (affine_e.transpose() * ka);
    }
}

SolveStats ReducedSolver::solve(const Voigt2& strain, double dt,
                                const std::vector<GpHistory>& hist,
                                std::vector<GpHistory>& hist_out,
                                Eigen::VectorXd& amplitudes,
                                MacroResponse& response, bool want_tangent)
{
    require(static_cast<int>(hist.size()) == history_size(),
            "history size mismatch");
    hist_out.resize(hist.size());
    const int nm = num_modes();
    if (amplitudes.size() != nm)
        amplitudes = Eigen::VectorXd::Zero(nm);

    DenseBlocks blocks;
    auto assemble_at = [&](const Eigen::VectorXd& a) {
        assemble_blocks(strain, dt, hist, hist_out, a, blocks);
    };

    SolveStats stats;
    const double tol_abs = tol_.abs_scale * force_scale_;
    assemble_at(amplitudes);
    double res_norm = blocks.residual.norm();
    stats.residual_history.push_back(res_norm);
    const double tol_total = tol_abs + tol_.rel * res_norm;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    while (nm > 0 && res_norm > tol_total) {
        if (stats.iterations >= tol_.max_iterations) {
            std::ostringstream os;
            os.precision(6);
            for (double r : stats.residual_history)
                os << " " << r;
            fail("reduced solve: no convergence after ", stats.iterations,
                 " iterations; residual history:", os.str());
        }
        lu.compute(blocks.k_uu);
        ++stats.linearizations;
        const Eigen::VectorXd step = lu.solve(-blocks.residual);
        ++stats.iterations;

        double alpha = 1.0;
        Eigen::VectorXd trial;
        for (;;) {
            trial = amplitudes + alpha * step;
            assemble_at(trial);
            const double trial_norm = blocks.residual.norm();
            if (trial_norm <= res_norm || trial_norm <= tol_total
                || alpha <= 1.0 / 16.0) {
                amplitudes = trial;
                res_norm = trial_norm;
                break;
            }
            alpha *= 0.5;
        }
        stats.residual_history.push_back(res_norm);
    }
    stats.residual = res_norm;

    response.strain = strain;
    response.stress = blocks.reactions / map_->volume;
    response.volume = map_->volume;
    response.bulk_volume = cache_->bulk_volume();
    response.v_rel = response.bulk_volume / response.volume;
    response.has_tangent = false;
    if (want_tangent) {
        if (nm > 0) {
            lu.compute(blocks.k_uu);
            ++stats.linearizations;
            const Eigen::MatrixXd x = lu.solve(blocks.k_ue);
            response.tangent = (blocks.k_ee - blocks.k_eu * x) / map_->volume;
        } else {
            response.tangent = blocks.k_ee / map_->volume;
        }
        response.has_tangent = true;
    }
    return stats;
}

void ReducedSolver::assemble_blocks(const Voigt2& strain, double dt,
                                    const std::vector<GpHistory>& hist,
                                    std::vector<GpHistory>& hist_out,
                                    const Eigen::VectorXd& amplitudes,
                                    DenseBlocks& blocks) const
{
    const Eigen::VectorXd u = reduced_link_ * amplitudes + map_->affine * strain;
    reset_blocks(blocks, num_modes());
    if (!scheme_) {
        for (int e = 0; e < cache_->mesh().num_elements(); ++e) {
            const int off = cache_->gp_offset(e);
            accumulate_element(e, 1.0, u, hist.data() + off, dt,
                               hist_out.data() + off, blocks, true);
        }
    } else if (scheme_value_.mode == HyperMode::Element) {
        for (size_t k = 0; k < scheme_value_.ids.size(); ++k)
            accumulate_element(scheme_value_.ids[k], scheme_value_.weights[k],
                               u, hist.data() + hist_offset_[k], dt,
                               hist_out.data() + hist_offset_[k], blocks, true);
    } else {
        for (size_t k = 0; k < scheme_value_.ids.size(); ++k) {
            const int id = scheme_value_.ids[k];
            int e = 0;
            while (cache_->gp_offset(e + 1) <= id)
                ++e;
            accumulate_gp(e, id - cache_->gp_offset(e),
                          scheme_value_.weights[k], u, hist[hist_offset_[k]],
                          dt, hist_out[hist_offset_[k]], blocks, true);
        }
    }
}

void ReducedSolver::linearize(const Voigt2& strain, double dt,
                              const std::vector<GpHistory>& hist,
                              std::vector<GpHistory>& hist_out,
                              const Eigen::VectorXd& amplitudes,
                              DenseBlocks& out)
{
    require(static_cast<int>(hist.size()) == history_size(),
            "history size mismatch");
    hist_out.resize(hist.size());
    require(amplitudes.size() == num_modes(), "amplitude vector size mismatch");
    assemble_blocks(strain, dt, hist, hist_out, amplitudes, out);
}

ReducedSolver::EntityColumns
ReducedSolver::collect(const Eigen::VectorXd& u_full, double dt,
                       const std::vector<GpHistory>& hist,
                       HyperMode mode) const
{
    require(!scheme_, "entity collection requires full integration");
    const Mesh& mesh = cache_->mesh();
    const int m = candidate_count(mode);
    const int nm = num_modes();

    EntityColumns cols;
    cols.forces.setZero(nm, m);
    cols.reactions.setZero(3, m);
    cols.strain.setZero(3, m);
    cols.stress.setZero(3, m);
    cols.power.setZero(m);
    cols.energy.setZero(m);
    cols.volumes.setZero(m);

    const Eigen::VectorXd& u = u_full;
    std::vector<GpHistory> scratch(cache_->num_gps());
    std::vector<GaussPointData> gp_data;
    ElementEval eval;
    Eigen::VectorXd u_e;
    Eigen::VectorXd residual = Eigen::VectorXd::Zero(nm);

    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        const int n = static_cast<int>(dofs.size());
        u_e.resize(n);
        for (int i = 0; i < n; ++i)
            u_e[i] = u[dofs[i]];
        const int off = cache_->gp_offset(e);
        evaluate_element(*cache_, e, (*materials_)[mesh.elements[e].material],
                         hist.data() + off, u_e, dt, scratch.data() + off,
                         eval, &gp_data);

        Eigen::MatrixXd modes_e(n, nm);
        Eigen::MatrixXd affine_e(n, 3);
        for (int i = 0; i < n; ++i) {
            modes_e.row(i) = reduced_link_.row(dofs[i]);
            affine_e.row(i) = map_->affine.row(dofs[i]);
        }

        if (mode == HyperMode::Element) {
            cols.forces.col(e) = modes_e.transpose() * eval.force;
            cols.reactions.col(e) = affine_e.transpose() * eval.force;
            cols.strain.col(e) = eval.integrals.strain_integral;
            cols.stress.col(e) = eval.integrals.stress_integral;
            cols.power[e] = eval.integrals.power_inc;
            cols.energy[e] = eval.integrals.energy;
            cols.volumes[e] = eval.integrals.volume;
        } else {
            for (int g = 0; g < cache_->gp_count(e); ++g) {
                const int id = off + g;
                const GaussPointData& gp = gp_data[g];
                cols.forces.col(id) = modes_e.transpose() * gp.force;
                cols.reactions.col(id) = affine_e.transpose() * gp.force;
                cols.strain.col(id) = gp.volume * gp.strain;
                cols.stress.col(id) = gp.volume * gp.stress;
                cols.power[id] = gp.power_inc;
                cols.energy[id] = gp.energy;
                cols.volumes[id] = gp.volume;
            }
        }
        residual += modes_e.transpose() * eval.force;
    }
    cols.residual_norm = residual.norm();
    return cols;
}

} // namespace hyperfe2
