#ifndef HYPERFE2_MATERIALS_HPP
#define HYPERFE2_MATERIALS_HPP

#include "hyperfe2/types.hpp"

#include <variant>
#include <vector>

namespace hyperfe2 {

struct ElasticParams {
    double youngs = 1.0;
    double poisson = 0.3;
    bool plane_stress = false;

    double bulk() const { return youngs / (3.0 * (1.0 - 2.0 * poisson)); }
    double shear() const { return youngs / (2.0 * (1.0 + poisson)); }
    void check() const;
};

struct J2Params {
    ElasticParams elastic; // plane strain only
    double yield0 = 1.0;   // initial yield stress
    double hardening = 0.0; // linear isotropic hardening modulus
    void check() const;
};

struct KelvinBranch {
    double modulus = 1.0;   // branch stiffness
    double viscosity = 1.0; // branch dashpot viscosity
};

/// Viscoelastic-viscoplastic-damage model (plane strain).
struct VevpParams {
    ElasticParams elastic;
    std::vector<KelvinBranch> branches;
    double visc_drag = 1.0;     // drag coefficient of the plastic dashpot
    double rate_exponent = 1.0; // exponent of the viscoplastic power law
    double yield0 = 1.0;        // initial yield stress
    double hard_modulus = 0.0;  // power-law hardening prefactor
    double hard_exponent = 1.0; // power-law hardening exponent
    double damage_resistance = 1.0; // energy scale of damage growth
    double damage_exponent = 1.0;
    bool implex = false; // explicit extrapolated update if set
    void check() const;
};

struct J2State {
    Voigt3 plastic_strain = Voigt3::Zero();
    double eq_plastic = 0.0;
};

struct VevpState {
    Eigen::Matrix<double, 6, Eigen::Dynamic> viscous_strain; // one column per branch
    Voigt3 plastic_strain = Voigt3::Zero();
    double eq_plastic = 0.0;
    double damage = 0.0;
    double eq_stress = 0.0;      // von Mises of the committed stress
    double energy_release = 0.0;
    // Committed rates of the previous step, used for extrapolation.
    double rate_eq_plastic = 0.0;
    double rate_damage = 0.0;
};

using MaterialState = std::variant<std::monostate, J2State, VevpState>;

struct MaterialResult {
    Voigt2 stress = Voigt2::Zero();
    Mat3 tangent = Mat3::Zero();
    double energy = 0.0;    // free energy density
    double power_inc = 0.0; // sigma^{t+1} : (eps^{t+1} - eps^t)
};

/// Per-Gauss-point committed history.
struct GpHistory {
    MaterialState state;
    Voigt2 strain = Voigt2::Zero();
};

struct Material {
    std::variant<ElasticParams, J2Params, VevpParams> model;

    MaterialState initial_state() const;

    /// Constitutive update: new stress/tangent at strain, starting from the
    /// committed history. The returned state is tentative until the caller
    /// commits it together with the strain.
    MaterialResult update(const Voigt2& strain, const GpHistory& history,
                          double dt, MaterialState& state_out) const;
};

/// Plane elasticity matrix (plane strain or plane stress).
Mat3 plane_elasticity(const ElasticParams& p);

MaterialResult elastic_update(const ElasticParams& p, const Voigt2& strain);

MaterialResult j2_update(const J2Params& p, const Voigt2& strain,
                         const J2State& state, J2State& state_out);

} // namespace hyperfe2

#endif
