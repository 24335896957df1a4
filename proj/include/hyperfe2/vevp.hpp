#ifndef HYPERFE2_VEVP_HPP
#define HYPERFE2_VEVP_HPP

#include "hyperfe2/materials.hpp"

namespace hyperfe2 {

/// Dispatches to the implicit or the explicit extrapolated update according
/// to params.implex. Both commit an implicitly integrated state; the explicit
/// variant returns extrapolated stress and a step-wise constant tangent.
MaterialResult vevp_update(const VevpParams& p, const Voigt2& strain,
                           const VevpState& old, double dt, VevpState& out);

/// Full 3D implicit update (plane-strain embedding is done by vevp_update).
/// Exposed for oracle-style re-evaluation in tests.
struct VevpImplicitResult {
    Voigt3 stress = Voigt3::Zero();
    VevpState state;
    bool plastic = false;
    int damage_iterations = 0;
};

VevpImplicitResult vevp_implicit_3d(const VevpParams& p, const Voigt3& strain,
                                    const VevpState& old, double dt);

/// Smoothed damage growth factor: 1/(1-d) below 0.99, cubic runout above so
/// that d = 1 is never reached.
double vevp_damage_growth_factor(double d);

} // namespace hyperfe2

#endif
