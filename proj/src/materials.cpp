#include "hyperfe2/materials.hpp"

#include "hyperfe2/vevp.hpp"

namespace hyperfe2 {

void ElasticParams::check() const
{
    require(youngs > 0.0, "elastic modulus must be positive");
    require(poisson > -1.0 && poisson < 0.5, "poisson ratio out of (-1, 0.5)");
}

void J2Params::check() const
{
    elastic.check();
    require(!elastic.plane_stress, "j2 material supports plane strain only");
    require(yield0 > 0.0, "initial yield stress must be positive");
    require(hardening >= 0.0, "hardening modulus must be non-negative");
}

void VevpParams::check() const
{
    elastic.check();
    require(!elastic.plane_stress, "vevp material supports plane strain only");
    for (const KelvinBranch& b : branches) {
        require(b.modulus > 0.0, "branch modulus must be positive");
        require(b.viscosity > 0.0, "branch viscosity must be positive");
    }
    require(visc_drag > 0.0, "viscous drag must be positive");
    require(rate_exponent > 0.0, "rate exponent must be positive");
    require(yield0 > 0.0, "initial yield stress must be positive");
    require(hard_modulus >= 0.0, "hardening prefactor must be non-negative");
    require(hard_exponent > 0.0, "hardening exponent must be positive");
    require(damage_resistance > 0.0, "damage resistance must be positive");
    require(damage_exponent >= 0.0, "damage exponent must be non-negative");
}

Mat3 plane_elasticity(const ElasticParams& p)
{
    Mat3 c = Mat3::Zero();
    if (p.plane_stress) {
        const double f = p.youngs / (1.0 - p.poisson * p.poisson);
        c(0, 0) = c(1, 1) = f;
        c(0, 1) = c(1, 0) = f * p.poisson;
        c(2, 2) = f * (1.0 - p.poisson) / 2.0;
    } else {
        const double kappa = p.bulk();
        const double mu = p.shear();
        c(0, 0) = c(1, 1) = kappa + 4.0 * mu / 3.0;
        c(0, 1) = c(1, 0) = kappa - 2.0 * mu / 3.0;
        c(2, 2) = mu;
    }
    return c;
}

MaterialResult elastic_update(const ElasticParams& p, const Voigt2& strain)
{
    MaterialResult r;
    r.tangent = plane_elasticity(p);
    r.stress = r.tangent * strain;
    r.energy = 0.5 * strain.dot(r.stress);
    return r;
}

namespace {

Voigt3 embed_plane_strain(const Voigt2& e)
{
    Voigt3 e3 = Voigt3::Zero();
    e3[0] = e[0];
    e3[1] = e[1];
    e3[3] = e[2];
    return e3;
}

Voigt2 plane_slice_stress(const Voigt3& s)
{
    return Voigt2(s[0], s[1], s[3]);
}

Mat3 plane_slice_tangent(const Mat6& c)
{
    Mat3 t;
    const int idx[3] = { 0, 1, 3 };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t(i, j) = c(idx[i], idx[j]);
    return t;
}

} // namespace

MaterialResult j2_update(const J2Params& p, const Voigt2& strain,
                         const J2State& state, J2State& state_out)
{
    const double kappa = p.elastic.bulk();
    const double mu = p.elastic.shear();

    const Voigt3 eps = embed_plane_strain(strain);
    const Voigt3 eps_el_trial = eps - state.plastic_strain;
    const double tr = eps_el_trial[0] + eps_el_trial[1] + eps_el_trial[2];
    const Voigt3 s_trial = deviatoric_stress_of_strain(mu, eps_el_trial);
    const double eq_trial = von_mises(s_trial);

    const double yield = p.yield0 + p.hardening * state.eq_plastic;
    state_out = state;

    Voigt3 sigma;
    Mat6 tangent6;
    if (eq_trial <= yield) {
        sigma = s_trial;
        sigma[0] += kappa * tr;
        sigma[1] += kappa * tr;
        sigma[2] += kappa * tr;
        tangent6 = isotropic_stiffness(kappa, mu);
    } else {
        const double dlam = (eq_trial - yield) / (3.0 * mu + p.hardening);
        const double beta1 = 1.0 - 3.0 * mu * dlam / eq_trial;
        Voigt3 s = beta1 * s_trial;
        sigma = s;
        sigma[0] += kappa * tr;
        sigma[1] += kappa * tr;
        sigma[2] += kappa * tr;

        // Flow increment (3/2) dlam s / sigma_eq; shear rows carry the
        // engineering factor 2.
        Voigt3 dep;
        const double c = 1.5 * dlam / eq_trial;
        dep.head<3>() = c * s.head<3>();
        dep.tail<3>() = 2.0 * c * s.tail<3>();
        state_out.plastic_strain += dep;
        state_out.eq_plastic += dlam;

        // Consistent tangent: kappa IicI + 2 mu beta1 I_dev - 2 mu beta2 N(x)N
        // with N the unit trial deviator direction.
        const double beta2 = 3.0 * mu / (3.0 * mu + p.hardening) - (1.0 - beta1);
        const double snorm = std::sqrt(stress_self_contract(s_trial));
        const Voigt3 nmat = s_trial / snorm; // unit trial deviator, stress Voigt
        // Dyad of stress-like tensors on engineering strain: plain outer product.
        const Mat6 ndyad = nmat * nmat.transpose();
        // kappa IxI + 2 mu beta1 I_dev, minus the return-direction rank-one term
        tangent6 = isotropic_stiffness(kappa, mu * beta1)
            - 2.0 * mu * beta2 * ndyad;
    }

    MaterialResult r;
    r.stress = plane_slice_stress(sigma);
    r.tangent = plane_slice_tangent(tangent6);
    // Elastic strain energy only; hardening energy excluded.
    const Voigt3 eps_el = eps - state_out.plastic_strain;
    r.energy = 0.5 * eps_el.dot(isotropic_stiffness(kappa, mu) * eps_el);
    return r;
}

MaterialState Material::initial_state() const
{
    if (std::holds_alternative<J2Params>(model))
        return J2State{};
    if (std::holds_alternative<VevpParams>(model)) {
        const auto& p = std::get<VevpParams>(model);
        VevpState s;
        s.viscous_strain.setZero(6, static_cast<int>(p.branches.size()));
        return s;
    }
    return std::monostate{};
}

MaterialResult Material::update(const Voigt2& strain, const GpHistory& history,
                                double dt, MaterialState& state_out) const
{
    MaterialResult r;
    if (const auto* el = std::get_if<ElasticParams>(&model)) {
        r = elastic_update(*el, strain);
        state_out = std::monostate{};
    } else if (const auto* j2 = std::get_if<J2Params>(&model)) {
        J2State out;
        r = j2_update(*j2, strain, std::get<J2State>(history.state), out);
        state_out = out;
    } else {
        const auto& p = std::get<VevpParams>(model);
        VevpState out;
        r = vevp_update(p, strain, std::get<VevpState>(history.state), dt, out);
        state_out = std::move(out);
    }
    r.power_inc = r.stress.dot(strain - history.strain);
    return r;
}

} // namespace hyperfe2
