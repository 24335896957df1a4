#ifndef HYPERFE2_ASSEMBLY_HPP
#define HYPERFE2_ASSEMBLY_HPP

#include "hyperfe2/materials.hpp"
#include "hyperfe2/mesh.hpp"
#include "hyperfe2/shape_functions.hpp"

#include <vector>

namespace hyperfe2 {

/// Geometry factors cached per Gauss point (B operator and w * detJ).
class FemCache {
public:
    explicit FemCache(const Mesh& mesh);

    struct GpGeom {
        Eigen::Matrix<double, 3, Eigen::Dynamic> B;
        double weight = 0.0; // w * detJ
    };

    const Mesh& mesh() const { return *mesh_; }
    int gp_offset(int e) const { return offsets_[e]; }
    int gp_count(int e) const { return offsets_[e + 1] - offsets_[e]; }
    int num_gps() const { return offsets_.back(); }
    const GpGeom& gp(int e, int g) const { return geom_[offsets_[e] + g]; }
    double element_volume(int e) const { return volumes_[e]; }
    /// Sum of element volumes (meshed bulk, excludes unmeshed pores).
    double bulk_volume() const { return bulk_volume_; }

private:
    const Mesh* mesh_;
    std::vector<int> offsets_;
    std::vector<GpGeom> geom_;
    std::vector<double> volumes_;
    double bulk_volume_ = 0.0;
};

struct ElementIntegrals {
    double volume = 0.0;
    Voigt2 strain_integral = Voigt2::Zero();
    Voigt2 stress_integral = Voigt2::Zero();
    double power_inc = 0.0;
    double energy = 0.0;
};

/// Per-Gauss-point record used by the hyper-reduction offline phase and by
/// the Gauss-point online mode.
struct GaussPointData {
    double volume = 0.0;
    Voigt2 strain = Voigt2::Zero();
    Voigt2 stress = Voigt2::Zero();
    double power_inc = 0.0;
    double energy = 0.0;
    Eigen::VectorXd force; // w detJ B^T sigma
};

struct ElementEval {
    Eigen::VectorXd force;
    Eigen::MatrixXd stiffness;
    ElementIntegrals integrals;
};

/// Evaluates one element with the committed histories `hist` (one slot per
/// Gauss point) and writes tentative histories to `hist_new`. Both are
/// element-local slices. Material failures rethrow with element/point ids.
void evaluate_element(const FemCache& cache, int e, const Material& material,
                      const GpHistory* hist, const Eigen::VectorXd& u_e,
                      double dt, GpHistory* hist_new, ElementEval& out,
                      std::vector<GaussPointData>* gp_data = nullptr);

/// Single Gauss point of an element; stiffness, if requested, is the
/// point's own contribution w detJ B^T C B.
void evaluate_gauss_point(const FemCache& cache, int e, int g,
                          const Material& material, const GpHistory& hist,
                          const Eigen::VectorXd& u_e, double dt,
                          GpHistory& hist_new, GaussPointData& out,
                          Eigen::MatrixXd* stiffness = nullptr);

/// Full-mesh assembly of the internal force vector and (optionally) the
/// tangent stiffness. The sparsity pattern is built once and reused; the
/// element loop runs in fixed order so results are reproducible.
class SparseAssembler {
public:
    SparseAssembler(const FemCache& cache, const std::vector<Material>& materials);

    const Material& material_of(int e) const;

    void assemble(const Eigen::VectorXd& u, const std::vector<GpHistory>& hist,
                  double dt, std::vector<GpHistory>& hist_new,
                  Eigen::VectorXd& force, SpMat* stiffness,
                  std::vector<ElementIntegrals>* integrals = nullptr);

    const SpMat& pattern() const { return pattern_; }

private:
    const FemCache* cache_;
    const std::vector<Material>* materials_;
    SpMat pattern_;                              // compressed, values zeroed
    std::vector<std::vector<int>> value_slots_;  // per element, column-major
};

} // namespace hyperfe2

#endif
