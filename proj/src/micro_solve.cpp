#include "hyperfe2/micro_solve.hpp"

#include <Eigen/SparseLU>

#include <fstream>
#include <sstream>

namespace hyperfe2 {

double reference_modulus(const std::vector<Material>& materials)
{
    double e_ref = 0.0;
    for (const Material& m : materials) {
        if (const auto* el = std::get_if<ElasticParams>(&m.model))
            e_ref = std::max(e_ref, el->youngs);
        else if (const auto* j2 = std::get_if<J2Params>(&m.model))
            e_ref = std::max(e_ref, j2->elastic.youngs);
        else
            e_ref = std::max(e_ref, std::get<VevpParams>(m.model).elastic.youngs);
    }
    return e_ref > 0.0 ? e_ref : 1.0;
}

MicroSolver::MicroSolver(const FemCache& cache,
                         const std::vector<Material>& materials,
                         const PeriodicMap& map, MicroTolerances tol)
    : cache_(&cache), materials_(&materials), map_(&map), tol_(tol),
      assembler_(cache, materials)
{
    force_scale_ = reference_modulus(materials) * std::sqrt(map.volume);
}

std::vector<GpHistory> MicroSolver::initial_history() const
{
    std::vector<GpHistory> hist(cache_->num_gps());
    const Mesh& mesh = cache_->mesh();
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const MaterialState init = assembler_.material_of(e).initial_state();
        for (int g = 0; g < cache_->gp_count(e); ++g)
            hist[cache_->gp_offset(e) + g].state = init;
    }
    return hist;
}

SolveStats MicroSolver::solve(const Voigt2& strain, double dt,
                              const std::vector<GpHistory>& hist,
                              std::vector<GpHistory>& hist_out,
                              Eigen::VectorXd& w_free, MacroResponse& response,
                              bool want_tangent)
{
    const int n_free = map_->num_free();
    if (w_free.size() != n_free)
        w_free = Eigen::VectorXd::Zero(n_free);

    SolveStats stats;
    const double tol_abs = tol_.abs_scale * force_scale_;

    Eigen::VectorXd force;
    SpMat stiffness;
    Eigen::VectorXd residual;
    Eigen::SparseLU<SpMat> lu;

    auto assemble_at = [&](const Eigen::VectorXd& w) {
        const Eigen::VectorXd u = map_->expand(w, strain);
        assembler_.assemble(u, hist, dt, hist_out, force, &stiffness);
        residual = map_->reduce_free(force);
    };

    assemble_at(w_free);
    double res_norm = residual.norm();
    stats.residual_history.push_back(res_norm);
    const double tol_total = tol_abs + tol_.rel * res_norm;

    while (res_norm > tol_total) {
        if (stats.iterations >= tol_.max_iterations) {
            std::ostringstream os;
            os.precision(6);
            for (double r : stats.residual_history)
                os << " " << r;
            fail("micro solve: no convergence after ", stats.iterations,
                 " iterations; residual history:", os.str());
        }
        const SpMat reduced = map_->link_free.transpose()
            * (stiffness * map_->link_free).eval();
        lu.compute(reduced);
        require(lu.info() == Eigen::Success,
                "micro solve: singular reduced stiffness (rigid mode?)");
        ++stats.linearizations;
        const Eigen::VectorXd step = lu.solve(-residual);
        ++stats.iterations;

        // Plain step with bisection damping on divergence.
        double alpha = 1.0;
        Eigen::VectorXd w_trial;
        for (;;) {
            w_trial = w_free + alpha * step;
            assemble_at(w_trial);
            const double trial_norm = residual.norm();
            if (trial_norm <= res_norm || trial_norm <= tol_total || alpha <= 1.0 / 16.0) {
                w_free = w_trial;
                res_norm = trial_norm;
                break;
            }
            alpha *= 0.5;
        }
        stats.residual_history.push_back(res_norm);
    }
    stats.residual = res_norm;

    response.strain = strain;
    response.stress = map_->reduce_macro(force) / map_->volume;
    response.volume = map_->volume;
    response.bulk_volume = cache_->bulk_volume();
    response.v_rel = response.bulk_volume / response.volume;
    response.has_tangent = false;

    if (want_tangent) {
        const SpMat reduced = map_->link_free.transpose()
            * (stiffness * map_->link_free).eval();
        lu.compute(reduced);
        require(lu.info() == Eigen::Success,
                "condensed tangent: singular reduced stiffness");
        ++stats.linearizations;
        const Eigen::MatrixXd k_fe = map_->link_free.transpose()
            * (stiffness * map_->affine);
        const Eigen::MatrixXd k_ef = map_->affine.transpose()
            * (stiffness * map_->link_free);
        const Mat3 k_ee = map_->affine.transpose() * (stiffness * map_->affine);
        const Eigen::MatrixXd x = lu.solve(k_fe);
        response.tangent = (k_ee - k_ef * x) / map_->volume;
        response.has_tangent = true;
    }
    return stats;
}

SolveStats MicroSolver::solve_stress(const Voigt2& stress_target, double dt,
                                     const std::vector<GpHistory>& hist,
                                     std::vector<GpHistory>& hist_out,
                                     Eigen::VectorXd& w_free,
                                     Voigt2& strain_inout,
                                     MacroResponse& response, bool want_tangent)
{
    const double e_ref = reference_modulus(*materials_);
    SolveStats total;
    for (int outer = 0; outer < 30; ++outer) {
        const SolveStats inner = solve(strain_inout, dt, hist, hist_out, w_free,
                                       response, true);
        total.iterations += inner.iterations;
        total.linearizations += inner.linearizations;
        const Voigt2 gap = stress_target - response.stress;
        total.residual = gap.norm() / e_ref;
        if (total.residual <= 1e-8) {
            if (!want_tangent)
                response.has_tangent = false;
            return total;
        }
        strain_inout += response.tangent.fullPivLu().solve(gap);
    }
    fail("stress-driven micro solve: no convergence, |Sigma - target|/E_ref = ",
         total.residual);
}

void MicroSolver::linearize(const Voigt2& strain, double dt,
                            const std::vector<GpHistory>& hist,
                            std::vector<GpHistory>& hist_out,
                            const Eigen::VectorXd& w_free, SparseBlocks& out)
{
    require(w_free.size() == map_->num_free(), "fluctuation vector size mismatch");
    Eigen::VectorXd force;
    SpMat stiffness;
    const Eigen::VectorXd u = map_->expand(w_free, strain);
    assembler_.assemble(u, hist, dt, hist_out, force, &stiffness);
    out.residual = map_->reduce_free(force);
    out.reactions = map_->reduce_macro(force);
    out.k_ff = map_->link_free.transpose() * (stiffness * map_->link_free).eval();
    out.k_fe = map_->link_free.transpose() * (stiffness * map_->affine);
    out.k_ef = map_->affine.transpose() * (stiffness * map_->link_free);
    out.k_ee = map_->affine.transpose() * (stiffness * map_->affine);
}

LoadPath load_path_csv(const std::string& file)
{
    std::ifstream in(file);
    require(in.good(), "cannot open load path '", file, "'");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty load path file '", file, "'");

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ','))
            out.push_back(tok);
        return out;
    };

    const auto header = split(line);
    require(header.size() == 4, "load path '", file, "': expected 4 columns");
    LoadPath path;
    if (header[1] == "S11" || header[1] == "s11")
        path.stress_driven = true;
    else
        require(header[1] == "E11" || header[1] == "e11", "load path '", file,
                "': unknown header column '", header[1], "'");

    std::vector<std::array<double, 4>> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto cols = split(line);
        require(cols.size() == 4, "load path '", file, "': bad row '", line, "'");
        rows.push_back({ std::stod(cols[0]), std::stod(cols[1]),
                         std::stod(cols[2]), std::stod(cols[3]) });
    }
    require(!rows.empty(), "load path '", file, "' has no samples");

    path.times.resize(rows.size());
    path.values.resize(rows.size(), 3);
    for (size_t i = 0; i < rows.size(); ++i) {
        path.times[i] = rows[i][0];
        path.values(i, 0) = rows[i][1];
        path.values(i, 1) = rows[i][2];
        // tensorial 12-component in the file, engineering shear internally
        path.values(i, 2) = path.stress_driven ? rows[i][3] : 2.0 * rows[i][3];
        if (i > 0)
            require(path.times[i] > path.times[i - 1], "load path '", file,
                    "': times must be strictly increasing");
    }
    return path;
}

void save_load_path_csv(const LoadPath& path, const std::string& file)
{
    std::ofstream out(file);
    require(out.good(), "cannot write load path '", file, "'");
    out.precision(17);
    out << (path.stress_driven ? "t,S11,S22,S12\n" : "t,E11,E22,E12\n");
    for (int i = 0; i < path.steps(); ++i) {
        const double shear = path.stress_driven ? path.values(i, 2)
                                                : 0.5 * path.values(i, 2);
        out << path.times[i] << "," << path.values(i, 0) << ","
            << path.values(i, 1) << "," << shear << "\n";
    }
}

} // namespace hyperfe2
