#include "hyperfe2/vevp.hpp"

#include <cmath>

namespace hyperfe2 {

namespace {

struct ChainFactors {
    int n = 0;
    double coupling = 0.0;        // scalar B of the resolved chain
    Eigen::MatrixXd inv_a;        // N x N
    Eigen::VectorXd drive_coeff;  // dt E / eta_i per branch
};

ChainFactors chain_factors(const VevpParams& p, double dt)
{
    ChainFactors f;
    f.n = static_cast<int>(p.branches.size());
    if (f.n == 0)
        return f;
    Eigen::MatrixXd a(f.n, f.n);
    f.drive_coeff.resize(f.n);
    for (int i = 0; i < f.n; ++i) {
        const double ci = dt * p.elastic.youngs / p.branches[i].viscosity;
        const double di = dt * p.branches[i].modulus / p.branches[i].viscosity;
        f.drive_coeff[i] = ci;
        for (int j = 0; j < f.n; ++j)
            a(i, j) = (i == j) ? 1.0 + ci + di : ci;
    }
    f.inv_a = a.inverse();
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j)
            f.coupling += f.inv_a(i, j) * f.drive_coeff[j];
    return f;
}

// sum_ij invA_ij eps_v_j^t
Voigt3 carried_viscous_strain(const ChainFactors& f,
                              const Eigen::Matrix<double, 6, Eigen::Dynamic>& ev)
{
    Voigt3 out = Voigt3::Zero();
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j)
            out += f.inv_a(i, j) * ev.col(j);
    return out;
}

// eps_v_i^{t+1} given the resolved driver (eps - eps_p^{t+1})
Eigen::Matrix<double, 6, Eigen::Dynamic>
branch_strains(const ChainFactors& f,
               const Eigen::Matrix<double, 6, Eigen::Dynamic>& ev_old,
               const Voigt3& driver)
{
    Eigen::Matrix<double, 6, Eigen::Dynamic> out(6, f.n);
    for (int i = 0; i < f.n; ++i) {
        Voigt3 acc = Voigt3::Zero();
        for (int j = 0; j < f.n; ++j)
            acc += f.inv_a(i, j) * (ev_old.col(j) + f.drive_coeff[j] * driver);
        out.col(i) = acc;
    }
    return out;
}

Voigt3 embed_plane_strain(const Voigt2& e)
{
    Voigt3 e3 = Voigt3::Zero();
    e3[0] = e[0];
    e3[1] = e[1];
    e3[3] = e[2];
    return e3;
}

struct Reconstruction {
    Voigt3 stress;
    Voigt3 plastic_strain;
    Eigen::Matrix<double, 6, Eigen::Dynamic> viscous;
    double eq_stress = 0.0;
    double energy_release = 0.0;
    double stored_energy = 0.0; // free energy with damage applied
};

// State quantities at candidate (r, d), from the closed-form chain.
Reconstruction reconstruct(const VevpParams& p, const ChainFactors& f,
                           const Voigt3& eps, const VevpState& old,
                           double sig_hat, const Voigt3& dev_driver_stress,
                           double r, double d)
{
    const double mu = p.elastic.shear();
    const double kappa = p.elastic.bulk();
    const double dr = r - old.eq_plastic;
    const double fac = 3.0 * mu * (1.0 - f.coupling) * dr;

    Reconstruction rec;
    rec.eq_stress = (1.0 - d) * sig_hat - fac;
    rec.plastic_strain = old.plastic_strain;
    if (dr > 0.0) {
        // sigma_d = 2 mu (1-d) sig_eq/(sig_eq + fac) * X; dev_driver_stress
        // already holds 2 mu X.
        const Voigt3 sigma_d =
            (1.0 - d) * rec.eq_stress / (rec.eq_stress + fac) * dev_driver_stress;
        const double c = 1.5 * dr / (rec.eq_stress * (1.0 - d));
        rec.plastic_strain.head<3>() += c * sigma_d.head<3>();
        rec.plastic_strain.tail<3>() += 2.0 * c * sigma_d.tail<3>();
    }
    rec.viscous = branch_strains(f, old.viscous_strain, eps - rec.plastic_strain);
    Voigt3 eps_v = Voigt3::Zero();
    for (int i = 0; i < f.n; ++i)
        eps_v += rec.viscous.col(i);
    const Voigt3 eps_e = eps - rec.plastic_strain - eps_v;
    const Mat6 ce = isotropic_stiffness(kappa, mu);
    rec.stress = (1.0 - d) * (ce * eps_e);
    rec.energy_release = 0.5 * eps_e.dot(ce * eps_e);
    rec.stored_energy = (1.0 - d) * rec.energy_release;
    for (int i = 0; i < f.n; ++i) {
        const double kv = p.branches[i].modulus / (3.0 * (1.0 - 2.0 * p.elastic.poisson));
        const double mv = p.branches[i].modulus / (2.0 * (1.0 + p.elastic.poisson));
        const Mat6 cv = isotropic_stiffness(kv, mv);
        const double w = 0.5 * rec.viscous.col(i).dot(cv * rec.viscous.col(i));
        rec.energy_release += w;
        rec.stored_energy += w;
    }
    return rec;
}

// Residual of the discretized viscoplastic flow at candidate (r, d).
double flow_residual(const VevpParams& p, const ChainFactors& f, double sig_hat,
                     double r_old, double r, double d, double dt)
{
    const double mu = p.elastic.shear();
    const double g = sig_hat
        - 3.0 * mu * (1.0 - f.coupling) * (r - r_old) / (1.0 - d)
        - p.hard_modulus * std::pow(r, p.hard_exponent) - p.yield0;
    const double gpos = std::max(g, 0.0);
    return r - r_old
        - dt / std::pow(p.visc_drag, 1.0 / p.rate_exponent)
        * std::pow(gpos, 1.0 / p.rate_exponent);
}

double solve_flow(const VevpParams& p, const ChainFactors& f, double sig_hat,
                  double r_old, double d, double dt)
{
    constexpr double tol_scale = 1e-10;
    auto res = [&](double r) {
        return flow_residual(p, f, sig_hat, r_old, r, d, dt);
    };
    double lo = r_old;
    double r_lo = res(lo);
    if (std::abs(r_lo) <= tol_scale * std::max(1.0, lo))
        return lo;
    require(r_lo < 0.0, "viscoplastic flow residual not negative at r^t");

    double step = std::max(1e-8, 1e-3 * std::max(1.0, r_old));
    double hi = r_old + step;
    int expand = 0;
    while (res(hi) < 0.0) {
        step *= 2.0;
        hi = r_old + step;
        require(++expand < 200, "viscoplastic bracket expansion failed");
    }

    const double mu = p.elastic.shear();
    double r = lo;
    for (int it = 0; it < 50; ++it) {
        const double rr = res(r);
        if (std::abs(rr) <= tol_scale * std::max(1.0, r))
            return r;
        (rr < 0.0 ? lo : hi) = r;
        const double g = sig_hat
            - 3.0 * mu * (1.0 - f.coupling) * (r - r_old) / (1.0 - d)
            - p.hard_modulus * std::pow(r, p.hard_exponent) - p.yield0;
        double next;
        if (g > 0.0) {
            const double m_inv = 1.0 / p.rate_exponent;
            const double gp = -3.0 * mu * (1.0 - f.coupling) / (1.0 - d)
                - p.hard_modulus * p.hard_exponent
                    * std::pow(r, p.hard_exponent - 1.0);
            const double drdr = 1.0
                - dt / std::pow(p.visc_drag, m_inv) * m_inv
                    * std::pow(g, m_inv - 1.0) * gp;
            next = r - rr / drdr;
        } else {
            next = 0.5 * (lo + hi);
        }
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        r = next;
    }
    fail("viscoplastic flow solve: no convergence after 50 iterations, |R_r| = ",
         std::abs(res(r)));
}

} // namespace

double vevp_damage_growth_factor(double d)
{
    if (d < 0.99)
        return 1.0 / (1.0 - d);
    return (3.0 * d * d * d - 8.96 * d * d + 8.92 * d - 2.96) * 1e8;
}

VevpImplicitResult vevp_implicit_3d(const VevpParams& p, const Voigt3& eps,
                                    const VevpState& old, double dt)
{
    require(dt > 0.0, "vevp update needs dt > 0");
    const double mu = p.elastic.shear();
    const ChainFactors f = chain_factors(p, dt);
    const Voigt3 carried = carried_viscous_strain(f, old.viscous_strain);

    // Deviatoric driver X = dev((1-B) eps - carried - (1-B) eps_p^t);
    // dev_driver_stress = 2 mu X, sig_hat its von Mises norm.
    const Voigt3 driver_full = (1.0 - f.coupling) * (eps - old.plastic_strain) - carried;
    const Voigt3 dev_driver_stress = deviatoric_stress_of_strain(mu, driver_full);
    const double sig_hat = von_mises(dev_driver_stress);

    const double f_trial = sig_hat
        - p.hard_modulus * std::pow(old.eq_plastic, p.hard_exponent) - p.yield0;

    VevpImplicitResult out;
    double r = old.eq_plastic;
    double d = old.damage;

    if (f_trial > 0.0) {
        out.plastic = true;
        auto damage_residual = [&](double dc) {
            const double rc = solve_flow(p, f, sig_hat, old.eq_plastic, dc, dt);
            const Reconstruction rec = reconstruct(p, f, eps, old, sig_hat,
                                                   dev_driver_stress, rc, dc);
            const double drive =
                std::pow(rec.energy_release / p.damage_resistance, p.damage_exponent);
            return std::make_pair(
                dc - old.damage
                    - drive * (rc - old.eq_plastic) * vevp_damage_growth_factor(dc),
                rc);
        };

        double a = old.damage;
        auto [res_a, r_a] = damage_residual(a);
        if (std::abs(res_a) <= 1e-12) {
            d = a;
            r = r_a;
        } else {
            require(res_a < 0.0, "damage residual not negative at d^t");
            // Bracket by doubling 1e-3 steps toward 1.
            double b = a;
            double res_b = res_a;
            double step = 1e-3;
            bool bracketed = false;
            for (int k = 0; k < 60; ++k) {
                b = std::min(a + step, 1.0 - 1e-12);
                res_b = damage_residual(b).first;
                if (res_b > 0.0) {
                    bracketed = true;
                    break;
                }
                step *= 2.0;
            }
            require(bracketed, "damage bracket not found: R_d(", a, ") = ",
                    res_a, ", R_d(", b, ") = ", res_b);

            // Regula falsi with Illinois damping of the stale endpoint.
            double val_a = res_a;
            double val_b = res_b;
            int side = 0;
            bool done = false;
            for (int it = 0; it < 200; ++it) {
                const double c = b - val_b * (b - a) / (val_b - val_a);
                auto [res_c, r_c] = damage_residual(c);
                ++out.damage_iterations;
                if (std::abs(res_c) <= 1e-12) {
                    d = c;
                    r = r_c;
                    done = true;
                    break;
                }
                if (res_c < 0.0) {
                    a = c;
                    val_a = res_c;
                    if (side == -1)
                        val_b *= 0.5;
                    side = -1;
                } else {
                    b = c;
                    val_b = res_c;
                    if (side == 1)
                        val_a *= 0.5;
                    side = 1;
                }
            }
            if (!done)
                fail("damage solve: no convergence after 200 regula falsi "
                     "iterations, |R_d| = ", std::min(std::abs(val_a), std::abs(val_b)),
                     ", bracket [", a, ", ", b, "]");
        }
    }

    const Reconstruction rec = reconstruct(p, f, eps, old, sig_hat,
                                           dev_driver_stress, r, d);
    out.stress = rec.stress;
    out.state = old;
    out.state.viscous_strain = rec.viscous;
    out.state.plastic_strain = rec.plastic_strain;
    out.state.eq_plastic = r;
    out.state.damage = d;
    out.state.eq_stress = out.plastic ? rec.eq_stress : von_mises(rec.stress);
    out.state.energy_release = rec.energy_release;
    out.state.rate_eq_plastic = (r - old.eq_plastic) / dt;
    out.state.rate_damage = (d - old.damage) / dt;
    return out;
}

namespace {

Voigt2 plane_slice(const Voigt3& s)
{
    return Voigt2(s[0], s[1], s[3]);
}

MaterialResult vevp_implicit_2d(const VevpParams& p, const Voigt2& strain,
                                const VevpState& old, double dt, VevpState& out)
{
    const Voigt3 eps = embed_plane_strain(strain);
    const VevpImplicitResult res = vevp_implicit_3d(p, eps, old, dt);
    out = res.state;

    MaterialResult r;
    r.stress = plane_slice(res.stress);
    const Mat6 ce = isotropic_stiffness(p.elastic.bulk(), p.elastic.shear());
    const double coupling = chain_factors(p, dt).coupling;
    if (!res.plastic) {
        // Viscoelastic branch is affine in strain.
        const Mat6 c6 = (1.0 - res.state.damage) * (1.0 - coupling) * ce;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int idx[3] = { 0, 1, 3 };
                r.tangent(i, j) = c6(idx[i], idx[j]);
            }
    } else {
        // Central differences of the local update; no closed-form consistent
        // tangent is available on this branch.
        const double h = 1e-7 * (1.0 + strain.lpNorm<Eigen::Infinity>());
        for (int j = 0; j < 3; ++j) {
            Voigt2 ep = strain, em = strain;
            ep[j] += h;
            em[j] -= h;
            const Voigt3 sp = vevp_implicit_3d(p, embed_plane_strain(ep), old, dt).stress;
            const Voigt3 sm = vevp_implicit_3d(p, embed_plane_strain(em), old, dt).stress;
            r.tangent.col(j) = (plane_slice(sp) - plane_slice(sm)) / (2.0 * h);
        }
    }

    // Free energy of the committed state.
    Voigt3 eps_v = Voigt3::Zero();
    for (int i = 0; i < out.viscous_strain.cols(); ++i)
        eps_v += out.viscous_strain.col(i);
    const Voigt3 eps_e = eps - out.plastic_strain - eps_v;
    r.energy = (1.0 - out.damage) * 0.5 * eps_e.dot(ce * eps_e);
    for (int i = 0; i < out.viscous_strain.cols(); ++i) {
        const double kv = p.branches[i].modulus / (3.0 * (1.0 - 2.0 * p.elastic.poisson));
        const double mv = p.branches[i].modulus / (2.0 * (1.0 + p.elastic.poisson));
        r.energy += 0.5 * out.viscous_strain.col(i).dot(
            isotropic_stiffness(kv, mv) * out.viscous_strain.col(i));
    }
    return r;
}

MaterialResult vevp_implex_2d(const VevpParams& p, const Voigt2& strain,
                              const VevpState& old, double dt, VevpState& out)
{
    const double mu = p.elastic.shear();
    const double kappa = p.elastic.bulk();
    const ChainFactors f = chain_factors(p, dt);
    const Voigt3 eps = embed_plane_strain(strain);
    const Voigt3 carried = carried_viscous_strain(f, old.viscous_strain);

    // Extrapolated damage and plastic multiplier from committed rates.
    double d_tilde = old.damage + dt * old.rate_damage;
    d_tilde = std::min(std::max(d_tilde, old.damage), 1.0 - 1e-9);
    double dlam = 0.0;
    if (old.rate_eq_plastic > 0.0 && old.eq_stress > 0.0)
        dlam = 1.5 / (old.eq_stress * (1.0 - old.damage))
            * old.rate_eq_plastic * dt;

    const double bfac = 1.0 - f.coupling;
    const double denom = 1.0 + (1.0 - d_tilde) * bfac * 2.0 * mu * dlam;
    const Voigt3 driver = bfac * (eps - old.plastic_strain) - carried;
    const double tr = (driver[0] + driver[1] + driver[2]) / 3.0;
    Voigt3 vol = Voigt3::Zero();
    vol[0] = vol[1] = vol[2] = 3.0 * kappa * tr;
    const Voigt3 sigma =
        (1.0 - d_tilde) * (vol + deviatoric_stress_of_strain(mu, driver) / denom);

    // Commit the implicit state for the next step's extrapolation.
    const VevpImplicitResult impl = vevp_implicit_3d(p, eps, old, dt);
    out = impl.state;

    MaterialResult r;
    r.stress = plane_slice(sigma);
    const double mu_eff = (1.0 - d_tilde) * bfac * mu / denom;
    const double kappa_eff = (1.0 - d_tilde) * bfac * kappa;
    const Mat6 c6 = isotropic_stiffness(kappa_eff, mu_eff);
    const int idx[3] = { 0, 1, 3 };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.tangent(i, j) = c6(idx[i], idx[j]);

    const Mat6 ce = isotropic_stiffness(kappa, mu);
    Voigt3 eps_v = Voigt3::Zero();
    for (int i = 0; i < out.viscous_strain.cols(); ++i)
        eps_v += out.viscous_strain.col(i);
    const Voigt3 eps_e = eps - out.plastic_strain - eps_v;
    r.energy = (1.0 - out.damage) * 0.5 * eps_e.dot(ce * eps_e);
    for (int i = 0; i < out.viscous_strain.cols(); ++i) {
        const double kv = p.branches[i].modulus / (3.0 * (1.0 - 2.0 * p.elastic.poisson));
        const double mv = p.branches[i].modulus / (2.0 * (1.0 + p.elastic.poisson));
        r.energy += 0.5 * out.viscous_strain.col(i).dot(
            isotropic_stiffness(kv, mv) * out.viscous_strain.col(i));
    }
    return r;
}

} // namespace

MaterialResult vevp_update(const VevpParams& p, const Voigt2& strain,
                           const VevpState& old, double dt, VevpState& out)
{
    if (p.implex)
        return vevp_implex_2d(p, strain, old, dt, out);
    return vevp_implicit_2d(p, strain, old, dt, out);
}

} // namespace hyperfe2
