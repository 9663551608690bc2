// Relative energy machinery: ballistic free energy, the (optionally
// renormalized) relative energy density with its eps^-2 internal scaling, the
// essential/residual decomposition, and the pointwise coercivity comparison.
#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stratlab/field.hpp"
#include "stratlab/mesh.hpp"
#include "stratlab/static_state.hpp"
#include "stratlab/thermo.hpp"

namespace stratlab {

// H_Theta(rho, theta) = rho e - Theta rho s for the perfect gas.
inline double ballistic_free_energy(double rho, double theta, double theta_ref,
                                    const GasParams& gas) {
    if (!(rho > 0.0) || !(theta > 0.0) || !(theta_ref > 0.0))
        throw std::domain_error("ballistic_free_energy: positive arguments required");
    return gas.c_v * rho * theta - theta_ref * rho * entropy(rho, theta, gas);
}

// d H_Theta / d rho at (r, Theta): Theta (c_v + 1 - s(r, Theta)).
inline double ballistic_free_energy_drho(double r, double theta_ref, const GasParams& gas) {
    return theta_ref * (gas.c_v + 1.0 - entropy(r, theta_ref, gas));
}

struct RelEnergyValue {
    double total = 0.0;
    double kinetic = 0.0;
    double internal = 0.0;
    bool vacuum_flagged = false;
};

// E_{eps,Z}(rho, E_int, m | r, Theta, U); cutoff == nullptr means Z(s) = s,
// which is the plain E_eps variant.
inline RelEnergyValue rel_energy_density(double rho, double e_int, const Vec3& m, double r,
                                         double theta_ref, const Vec3& u_ref, double epsilon,
                                         const CutoffSpec* cutoff, const GasParams& gas) {
    if (!(r > 0.0) || !(theta_ref > 0.0))
        throw std::domain_error("rel_energy_density: reference must satisfy r, Theta > 0");
    RelEnergyValue v;
    const double inv_eps2 = 1.0 / (epsilon * epsilon);
    const double h_ref = ballistic_free_energy(r, theta_ref, theta_ref, gas);
    const double dh_ref = ballistic_free_energy_drho(r, theta_ref, gas);
    if (rho < kVacuumFloor) {
        // vacuum convention: m = 0, kinetic part 0, internal part by limit
        v.vacuum_flagged = true;
        v.kinetic = 0.5 * rho * norm2(u_ref);
        v.internal = inv_eps2 * (e_int - dh_ref * (rho - r) - h_ref);
        v.total = v.kinetic + v.internal;
        return v;
    }
    Vec3 du{m[0] / rho - u_ref[0], m[1] / rho - u_ref[1], m[2] / rho - u_ref[2]};
    v.kinetic = 0.5 * rho * norm2(du);
    const double s = entropy_from_eint(rho, e_int, gas);
    const double zs = cutoff ? (*cutoff)(s) : s;
    v.internal = inv_eps2 * (e_int - theta_ref * rho * zs - dh_ref * (rho - r) - h_ref);
    v.total = v.kinetic + v.internal;
    return v;
}

// Essential/residual decomposition: a C^2 plateau Psi(rho, E_int) equal to 1
// on the image of the compact set K = [rho_lo, rho_hi] x [th_lo, th_hi] under
// (rho, theta) -> (rho, c_v rho theta) and 0 beyond a 25% margin.
struct EssResSplit {
    double rho_lo = 0.5, rho_hi = 2.0;
    double th_lo = 0.5, th_hi = 2.0;
    double margin = 0.25;
    GasParams gas{};

    static EssResSplit around_static(const StaticState& s, const GasParams& gas,
                                     double margin = 0.25) {
        EssResSplit split;
        split.rho_lo = 0.5 * s.min_rho();
        split.rho_hi = 2.0 * s.max_rho();
        split.th_lo = 0.5 * s.theta_bar;
        split.th_hi = 2.0 * s.theta_bar;
        split.margin = margin;
        split.gas = gas;
        return split;
    }

    // quintic smoothstep, C^2 at both ends
    static double smoothstep(double u) {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    }
    static double plateau(double x, double lo, double hi, double margin) {
        const double wl = margin * lo, wh = margin * hi;
        if (x < lo - wl || x > hi + wh) return 0.0;
        if (x < lo) return smoothstep((x - (lo - wl)) / wl);
        if (x > hi) return 1.0 - smoothstep((x - hi) / wh);
        return 1.0;
    }

    double psi(double rho, double e_int) const {
        const double pr = plateau(rho, rho_lo, rho_hi, margin);
        if (pr == 0.0) return 0.0;
        const double theta = e_int / (gas.c_v * rho);
        return pr * plateau(theta, th_lo, th_hi, margin);
    }
};

struct EssResValue {
    double ess = 0.0;
    double res = 0.0;
};

inline EssResValue ess_res_split(double g, double rho, double e_int, const EssResSplit& split) {
    const double psi = split.psi(rho, e_int);
    return {psi * g, (1.0 - psi) * g};
}

// Pointwise two-sided coercivity comparison: lhs is the un-truncated relative
// energy against (rho_s, Theta_bar, 0); rhs collects the kinetic term, the
// quadratic essential deviations, and the first-order residual bulk.
struct CoercivityValue {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs / rhs, 0 when rhs == 0
};

inline CoercivityValue coercivity_check(double rho, double e_int, const Vec3& m, double rho_s,
                                        double theta_bar, double epsilon,
                                        const EssResSplit& split, const GasParams& gas) {
    CoercivityValue v;
    const RelEnergyValue lhs =
        rel_energy_density(rho, e_int, m, rho_s, theta_bar, {0.0, 0.0, 0.0}, epsilon, nullptr, gas);
    v.lhs = lhs.total;
    const double inv_eps2 = 1.0 / (epsilon * epsilon);
    const double psi = split.psi(rho, e_int);
    const double kin = rho > 0.0 ? norm2(m) / rho : 0.0;
    const double drho = rho - rho_s;
    const double dei = e_int - gas.c_v * rho_s * theta_bar;
    const double ess = psi * (drho * drho + dei * dei);
    double sabs = 0.0;
    if (rho > kVacuumFloor && e_int > 0.0)
        sabs = std::abs(entropy_from_eint(rho, e_int, gas));
    const double res = (1.0 - psi) * (1.0 + rho + rho * sabs + e_int);
    v.rhs = kin + inv_eps2 * ess + inv_eps2 * res;
    v.ratio = v.rhs > 0.0 ? v.lhs / v.rhs : 0.0;
    return v;
}

// Field-level relative energy report with essential/residual parts.
struct RelEnergyReport {
    double t = 0.0;
    double total = 0.0;
    double kinetic = 0.0;
    double internal = 0.0;
    double ess = 0.0;
    double res = 0.0;
    bool vacuum_flagged = false;
    std::vector<double> density;  // per cell
};

// Smooth reference triple (r, Theta, U) with analytically supplied derivatives.
struct ReferenceTriple {
    std::function<double(double, const Vec3&)> r;
    std::function<double(double, const Vec3&)> theta;
    std::function<Vec3(double, const Vec3&)> u;
    std::function<double(double, const Vec3&)> dt_theta;
    std::function<Vec3(double, const Vec3&)> grad_theta;
    std::function<Vec3(double, const Vec3&)> dt_u;
    std::function<std::array<Vec3, 3>(double, const Vec3&)> grad_u;  // [component][axis]
    std::function<double(double, const Vec3&)> dt_p;   // d_t p(r, Theta)
    std::function<Vec3(double, const Vec3&)> grad_p;   // grad p(r, Theta)

    // (rho_s, Theta_bar, 0): the stratified rest reference.
    static ReferenceTriple static_reference(const StaticState& s, int ndim) {
        ReferenceTriple ref = trivial();
        const int vpos = ndim - 1;
        ref.r = [s, vpos](double, const Vec3& x) { return s.rho_at(x[vpos]); };
        ref.theta = [s](double, const Vec3&) { return s.theta_bar; };
        ref.grad_p = [s, vpos](double, const Vec3& x) {
            Vec3 g{0.0, 0.0, 0.0};
            g[vpos] = -s.rho_at(x[vpos]);  // d/dz (rho_s Theta_bar) = -rho_s
            return g;
        };
        return ref;
    }

    // (rho_s, Theta_bar, (g(z), 0, 0)): stratified stationary shear.
    static ReferenceTriple shear_reference(const StaticState& s, int ndim,
                                           std::function<double(double)> g) {
        ReferenceTriple ref = static_reference(s, ndim);
        const int vpos = ndim - 1;
        ref.u = [g, vpos](double, const Vec3& x) { return Vec3{g(x[vpos]), 0.0, 0.0}; };
        ref.grad_u = [g, vpos](double, const Vec3& x) {
            std::array<Vec3, 3> gu{};
            const double h = 1e-6;
            gu[0][vpos] = (g(x[vpos] + h) - g(x[vpos] - h)) / (2.0 * h);
            return gu;
        };
        return ref;
    }

    static ReferenceTriple trivial() {
        ReferenceTriple ref;
        ref.r = [](double, const Vec3&) { return 1.0; };
        ref.theta = [](double, const Vec3&) { return 1.0; };
        ref.u = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
        ref.dt_theta = [](double, const Vec3&) { return 0.0; };
        ref.grad_theta = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
        ref.dt_u = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
        ref.grad_u = [](double, const Vec3&) { return std::array<Vec3, 3>{}; };
        ref.dt_p = [](double, const Vec3&) { return 0.0; };
        ref.grad_p = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
        return ref;
    }
};

// Midpoint (cell-center) quadrature of the relative energy of a grid field
// against a reference triple.  Vacuum cells are flagged and excluded, and the
// report is marked accordingly.
inline RelEnergyReport rel_energy_integral(const FieldState& field, const ReferenceTriple& ref,
                                           double epsilon, const CutoffSpec* cutoff,
                                           const GasParams& gas,
                                           const EssResSplit* split = nullptr) {
    const Mesh& mesh = field.mesh();
    RelEnergyReport rep;
    rep.t = field.time;
    rep.density.assign(mesh.cell_count(), 0.0);
    const double vol = mesh.cell_volume();
    for (int k = 0; k < mesh.nz(); ++k)
        for (int j = 0; j < mesh.ny(); ++j)
            for (int i = 0; i < mesh.nx(); ++i) {
                const std::size_t c = mesh.index(i, j, k);
                const Vec3 x = mesh.center(i, j, k);
                const double rho = field.rho()[c];
                if (rho < kVacuumFloor) {
                    rep.vacuum_flagged = true;  // excluded; run not certifiable
                    continue;
                }
                const RelEnergyValue v = rel_energy_density(
                    rho, field.e_int(c), field.momentum(c), ref.r(field.time, x),
                    ref.theta(field.time, x), ref.u(field.time, x), epsilon, cutoff, gas);
                rep.density[c] = v.total;
                rep.total += v.total * vol;
                rep.kinetic += v.kinetic * vol;
                rep.internal += v.internal * vol;
                if (split) {
                    const double psi = split->psi(rho, field.e_int(c));
                    rep.ess += psi * v.total * vol;
                    rep.res += (1.0 - psi) * v.total * vol;
                }
            }
    if (!split) {
        rep.ess = rep.total;
        rep.res = 0.0;
    }
    return rep;
}

inline void append_rel_energy_csv(std::ofstream& out, const RelEnergyReport& rep) {
    out.precision(17);
    out << rep.t << "," << rep.total << "," << rep.kinetic << "," << rep.internal << ","
        << rep.ess << "," << rep.res << "\n";
}

}  // namespace stratlab
