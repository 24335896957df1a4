#include "hyperfe2/assembly.hpp"

#include <algorithm>

namespace hyperfe2 {

FemCache::FemCache(const Mesh& mesh) : mesh_(&mesh)
{
    offsets_ = mesh.gauss_offsets();
    geom_.resize(offsets_.back());
    volumes_.assign(mesh.num_elements(), 0.0);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.elements[e];
        const auto coords = mesh.element_coords(e);
        const QuadratureRule& rule = quadrature_for(el.type);
        for (int g = 0; g < rule.count(); ++g) {
            BMatrixEval b;
            try {
                b = b_matrix(el.type, coords, rule.points.row(g).transpose());
            } catch (const Error& err) {
                fail("element ", e, ", gauss point ", g, ": ", err.what());
            }
            GpGeom& geom = geom_[offsets_[e] + g];
            geom.B = b.B;
            geom.weight = rule.weights[g] * b.det_jacobian;
            volumes_[e] += geom.weight;
        }
        bulk_volume_ += volumes_[e];
    }
}

void evaluate_gauss_point(const FemCache& cache, int e, int g,
                          const Material& material, const GpHistory& hist,
                          const Eigen::VectorXd& u_e, double dt,
                          GpHistory& hist_new, GaussPointData& out,
                          Eigen::MatrixXd* stiffness)
{
    const FemCache::GpGeom& geom = cache.gp(e, g);
    const Voigt2 strain = geom.B * u_e;

    MaterialResult res;
    MaterialState state_new;
    try {
        res = material.update(strain, hist, dt, state_new);
    } catch (const Error& err) {
        fail("element ", e, ", gauss point ", g, ": ", err.what());
    }
    hist_new.state = std::move(state_new);
    hist_new.strain = strain;

    out.volume = geom.weight;
    out.strain = strain;
    out.stress = res.stress;
    out.power_inc = geom.weight * res.power_inc;
    out.energy = geom.weight * res.energy;
    out.force = geom.weight * (geom.B.transpose() * res.stress);
    if (stiffness)
        *stiffness = geom.weight
            * (geom.B.transpose() * res.tangent * geom.B);
}

void evaluate_element(const FemCache& cache, int e, const Material& material,
                      const GpHistory* hist, const Eigen::VectorXd& u_e,
                      double dt, GpHistory* hist_new, ElementEval& out,
                      std::vector<GaussPointData>* gp_data)
{
    const int ndof = static_cast<int>(u_e.size());
    const int ngp = cache.gp_count(e);
    out.force = Eigen::VectorXd::Zero(ndof);
    out.stiffness = Eigen::MatrixXd::Zero(ndof, ndof);
    out.integrals = ElementIntegrals{};
    if (gp_data)
        gp_data->resize(ngp);

    GaussPointData gp;
    Eigen::MatrixXd k_gp;
    for (int g = 0; g < ngp; ++g) {
        evaluate_gauss_point(cache, e, g, material, hist[g], u_e, dt,
                             hist_new[g], gp, &k_gp);
        out.force += gp.force;
        out.stiffness += k_gp;
        out.integrals.volume += gp.volume;
        out.integrals.strain_integral += gp.volume * gp.strain;
        out.integrals.stress_integral += gp.volume * gp.stress;
        out.integrals.power_inc += gp.power_inc;
        out.integrals.energy += gp.energy;
        if (gp_data)
            (*gp_data)[g] = gp;
    }
}

SparseAssembler::SparseAssembler(const FemCache& cache,
                                 const std::vector<Material>& materials)
    : cache_(&cache), materials_(&materials)
{
    const Mesh& mesh = cache.mesh();
    for (const Element& el : mesh.elements)
        require(el.material >= 0 && el.material < static_cast<int>(materials.size()),
                "element material id ", el.material, " out of range");

    std::vector<Triplet> trips;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        for (int j : dofs)
            for (int i : dofs)
                trips.emplace_back(i, j, 0.0);
    }
    pattern_.resize(mesh.num_dofs(), mesh.num_dofs());
    pattern_.setFromTriplets(trips.begin(), trips.end());
    pattern_.makeCompressed();

    // Scatter tables: value-array slot of each (local row, local col) pair.
    value_slots_.resize(mesh.num_elements());
    const int* outer = pattern_.outerIndexPtr();
    const int* inner = pattern_.innerIndexPtr();
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        const int n = static_cast<int>(dofs.size());
        value_slots_[e].resize(n * n);
        for (int j = 0; j < n; ++j) {
            const int col = dofs[j];
            for (int i = 0; i < n; ++i) {
                const int row = dofs[i];
                const int* lo = inner + outer[col];
                const int* hi = inner + outer[col + 1];
                const int* it = std::lower_bound(lo, hi, row);
                value_slots_[e][j * n + i] = static_cast<int>(it - inner);
            }
        }
    }
}

const Material& SparseAssembler::material_of(int e) const
{
    return (*materials_)[cache_->mesh().elements[e].material];
}

void SparseAssembler::assemble(const Eigen::VectorXd& u,
                               const std::vector<GpHistory>& hist, double dt,
                               std::vector<GpHistory>& hist_new,
                               Eigen::VectorXd& force, SpMat* stiffness,
                               std::vector<ElementIntegrals>* integrals)
{
    const Mesh& mesh = cache_->mesh();
    require(u.size() == mesh.num_dofs(), "displacement vector has ", u.size(),
            " entries, mesh has ", mesh.num_dofs(), " dofs");
    require(static_cast<int>(hist.size()) == cache_->num_gps(),
            "history size mismatch");
    hist_new.resize(hist.size());

    force.setZero(mesh.num_dofs());
    double* values = nullptr;
    if (stiffness) {
        if (stiffness->nonZeros() != pattern_.nonZeros())
            *stiffness = pattern_;
        values = stiffness->valuePtr();
        std::fill(values, values + stiffness->nonZeros(), 0.0);
    }
    if (integrals)
        integrals->assign(mesh.num_elements(), ElementIntegrals{});

    ElementEval eval;
    Eigen::VectorXd u_e;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto dofs = mesh.element_dofs(e);
        const int n = static_cast<int>(dofs.size());
        u_e.resize(n);
        for (int i = 0; i < n; ++i)
            u_e[i] = u[dofs[i]];

        const int off = cache_->gp_offset(e);
        evaluate_element(*cache_, e, material_of(e), hist.data() + off, u_e,
                         dt, hist_new.data() + off, eval);

        for (int i = 0; i < n; ++i)
            force[dofs[i]] += eval.force[i];
        if (values) {
            const std::vector<int>& slots = value_slots_[e];
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    values[slots[j * n + i]] += eval.stiffness(i, j);
        }
        if (integrals)
            (*integrals)[e] = eval.integrals;
    }
}

} // namespace hyperfe2
